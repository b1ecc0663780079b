//! Partial pre-reduction of time-varying systems.
//!
//! When every time-dependent entry sits at row >= β and column >= β, the
//! first β Gauss-Jordan iterations touch only constants — they neither read
//! a varying cell as pivot or multiplier nor scale a row containing one.
//! Those iterations can therefore run *once*, ahead of the time sweep, and
//! each step of the sweep only injects the current variable values into the
//! reduced base and finishes the remaining pivots `β .. n`. The per-step
//! cost drops from order `n^3` to order `n r^2` with `r = n - β` columns
//! left to finish.
//!
//! [`compute_boundary`] picks the largest safe β straight from the variable
//! positions; [`gauss_jordan_partial`] runs the bounded iterations (swaps
//! restricted to rows inside the boundary — pulling a row from beyond β
//! could drag a variable into the reduced region); [`finish_solve`]
//! completes an injected instance with either kernel. The symbolic audit of
//! the same safety rules lives in [`crate::symbolic`].

use crate::error::{Error, Result};
use crate::matrix::{AugmentedMatrix, OpCounter, Solution};
use crate::parallel::solve_blocks_from;
use crate::serial::{find_swap_row, iterate, solve_from, SolveOutcome};
use crate::system::{TimeVaryingSystem, VariableEntry};

/// Which finishing kernel completes the remaining pivots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    Serial,
    Parallel { threads: usize },
}

/// A base matrix reduced through its boundary, ready for per-step injection.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionResult {
    reduced: AugmentedMatrix,
    boundary: usize,
    completed: usize,
    vars: Vec<VariableEntry>,
}

impl ReductionResult {
    pub fn reduced(&self) -> &AugmentedMatrix {
        &self.reduced
    }

    /// The boundary β the reduction aimed for.
    pub fn boundary(&self) -> usize {
        self.boundary
    }

    /// Iterations actually completed; equals [`boundary`](Self::boundary)
    /// unless the base hit a singular pivot inside the boundary.
    pub fn completed(&self) -> usize {
        self.completed
    }

    pub fn vars(&self) -> &[VariableEntry] {
        &self.vars
    }

    /// Reinterprets an early-returned reduction as a complete reduction to
    /// the smaller boundary it did reach. Sound because stopping after `i`
    /// iterations *is* the reduction with β = i.
    pub fn clamped_to_completed(mut self) -> Self {
        self.boundary = self.completed;
        self
    }

    /// Rebuilds a reduction from a deserialized system whose base is an
    /// already-reduced matrix and whose recorded boundary is `boundary`
    /// (the round-trip partner of a saved reduction). The boundary must not
    /// reach past the system's own variable-derived limit — a file claiming
    /// otherwise describes a reduction that could never have been safe.
    pub fn resume(sys: &TimeVaryingSystem, boundary: usize) -> Result<Self> {
        let limit = compute_boundary(sys);
        if boundary > limit {
            return Err(Error::InvalidConfig {
                reason: format!(
                    "recorded boundary {boundary} exceeds the safe boundary {limit} \
                     for the system's variable positions"
                ),
            });
        }
        Ok(Self {
            reduced: sys.base().clone(),
            boundary,
            completed: boundary,
            vars: sys.vars().to_vec(),
        })
    }
}

/// Largest safe reduction boundary for the system: the minimum of the first
/// variable-bearing column and the first variable-bearing row (`n` when the
/// system has no variables — everything is constant and reducible).
pub fn compute_boundary(sys: &TimeVaryingSystem) -> usize {
    let n = sys.n();
    sys.vars()
        .iter()
        .map(|v| v.row.min(v.col))
        .min()
        .unwrap_or(n)
}

/// Runs Gauss-Jordan iterations `0 .. boundary` in place, with pivot swaps
/// drawn only from rows inside the boundary. Returns the number of
/// completed iterations: `boundary` normally, or `i < boundary` when
/// column `i` had no usable pivot — in that case the matrix is left exactly
/// as it stood after `i` whole iterations (iteration `i` not started), so
/// the caller can still finish from pivot `i`.
pub fn gauss_jordan_partial(
    a: &mut AugmentedMatrix,
    boundary: usize,
    eps: f64,
    counters: &mut OpCounter,
) -> usize {
    assert!(boundary <= a.n(), "boundary {boundary} exceeds order {}", a.n());
    for i in 0..boundary {
        if a.get(i, i).abs() <= eps {
            match find_swap_row(a, i, boundary, eps) {
                Some(j) => {
                    a.swap_rows(i, j);
                    counters.record_swap();
                }
                None => return i,
            }
        }
        iterate(a, i, counters);
    }
    boundary
}

/// Reduces a system's base through [`compute_boundary`]. Never fails: a
/// singular pivot inside the boundary just stops early, recorded in
/// [`ReductionResult::completed`].
pub fn reduce(sys: &TimeVaryingSystem, eps: f64) -> (ReductionResult, OpCounter) {
    let boundary = compute_boundary(sys);
    let mut reduced = sys.base().clone();
    let mut counters = OpCounter::new();
    let completed = gauss_jordan_partial(&mut reduced, boundary, eps, &mut counters);
    (
        ReductionResult {
            reduced,
            boundary,
            completed,
            vars: sys.vars().to_vec(),
        },
        counters,
    )
}

/// Injects the variables at time `t` into the reduced base and runs the
/// remaining pivots `β .. n`. Requires a reduction that reached its
/// boundary (see [`ReductionResult::clamped_to_completed`] for the salvage
/// path). The parallel kernel spans all `n` rows — back-substitution from
/// the finishing pivots still updates the reduced rows above β.
pub fn finish_solve(
    red: &ReductionResult,
    t: f64,
    kernel: Kernel,
    eps: f64,
) -> Result<SolveOutcome> {
    if red.completed != red.boundary {
        return Err(Error::IncompleteReduction {
            completed: red.completed,
            boundary: red.boundary,
        });
    }
    let mut work = TimeVaryingSystem::inject_into(&red.reduced, &red.vars, t)?;
    let mut counters = OpCounter::new();
    let swaps_performed = match kernel {
        Kernel::Serial => solve_from(&mut work, red.boundary, eps, &mut counters)?,
        Kernel::Parallel { threads } => {
            let run = solve_blocks_from(&mut work, red.boundary, threads, eps)?;
            counters.merge(&run.counters);
            run.swaps
        }
    };
    Ok(SolveOutcome {
        solution: Solution::new(work.free_terms())?,
        swaps_performed,
        counters,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::default_eps;
    use crate::oracle::oracle_solve;
    use crate::serial::gauss_jordan_serial;
    use crate::simulation::example_circuit;
    use crate::system::TimeFunction;

    fn var_at(row: usize, col: usize) -> VariableEntry {
        VariableEntry {
            row,
            col,
            func: TimeFunction::Constant { value: 1.0 },
        }
    }

    #[test]
    fn boundary_is_min_of_first_variable_row_and_column() {
        let sys = example_circuit();
        assert_eq!(compute_boundary(&sys), 2);

        let base = AugmentedMatrix::zeros(6).unwrap();
        let sys =
            TimeVaryingSystem::new(base.clone(), vec![var_at(1, 5), var_at(4, 3)]).unwrap();
        assert_eq!(compute_boundary(&sys), 1);

        let sys = TimeVaryingSystem::new(base, vec![]).unwrap();
        assert_eq!(compute_boundary(&sys), 6);
    }

    #[test]
    fn partial_reduction_reproduces_the_worked_circuit_rows() {
        let sys = example_circuit();
        let (red, counters) = reduce(&sys, default_eps(sys.base()));
        assert_eq!(red.boundary(), 2);
        assert_eq!(red.completed(), 2);
        let want = [
            [1.0, 0.0, -0.6, 0.008],
            [0.0, 1.0, 0.4, 0.008],
            [0.0, 0.0, 360.0, 7.2],
        ];
        for (i, row) in want.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let got = red.reduced().get(i, j);
                assert!(
                    (got - v).abs() <= 1e-12,
                    "entry ({i}, {j}): {got} vs {v}"
                );
            }
        }
        assert!(counters.row_ops() > 0);
    }

    #[test]
    fn zero_boundary_leaves_the_matrix_untouched() {
        let a = AugmentedMatrix::from_rows(&[
            vec![2.0, 3.0, 4.0],
            vec![5.0, 6.0, 7.0],
        ])
        .unwrap();
        let mut work = a.clone();
        let mut c = OpCounter::new();
        assert_eq!(gauss_jordan_partial(&mut work, 0, 1e-12, &mut c), 0);
        assert_eq!(work, a);
        assert_eq!(c.row_ops(), 0);
    }

    #[test]
    fn early_return_leaves_exactly_the_completed_iterations() {
        // Column 1 is zero inside the boundary (rows 0..3), so iteration 1
        // cannot find a pivot; the matrix must be the state after one whole
        // iteration and nothing more.
        let a = AugmentedMatrix::from_rows(&[
            vec![2.0, 0.0, 1.0, 4.0],
            vec![4.0, 0.0, 5.0, 6.0],
            vec![6.0, 0.0, 2.0, 8.0],
        ])
        .unwrap();
        let mut work = a.clone();
        let mut c = OpCounter::new();
        let completed = gauss_jordan_partial(&mut work, 3, 1e-12, &mut c);
        assert_eq!(completed, 1);

        let mut reference = a.clone();
        let mut rc = OpCounter::new();
        iterate(&mut reference, 0, &mut rc);
        assert_eq!(work, reference);
        assert_eq!(c, rc);
    }

    #[test]
    fn swaps_do_not_reach_beyond_the_boundary()  {
        // Row 2 could rescue column 1, but it lies outside boundary 2; the
        // reduction must stop at iteration 1 instead of using it.
        let a = AugmentedMatrix::from_rows(&[
            vec![1.0, 2.0, 0.0, 3.0],
            vec![0.0, 0.0, 1.0, 4.0],
            vec![0.0, 5.0, 2.0, 6.0],
        ])
        .unwrap();
        let mut work = a.clone();
        let mut c = OpCounter::new();
        assert_eq!(gauss_jordan_partial(&mut work, 2, 1e-12, &mut c), 1);
        assert_eq!(work.get(2, 1), 5.0, "row beyond the boundary was moved");
    }

    #[test]
    fn finish_solve_reproduces_the_crest_solution() {
        let sys = example_circuit();
        let (red, _) = reduce(&sys, default_eps(sys.base()));
        let want = [0.01, 1.0 / 150.0, 1.0 / 300.0];
        for kernel in [Kernel::Serial, Kernel::Parallel { threads: 2 }] {
            let out = finish_solve(&red, 0.5, kernel, default_eps(sys.base())).unwrap();
            for (g, w) in out.solution.as_slice().iter().zip(&want) {
                assert!((g - w).abs() < 1e-9, "{kernel:?}: {g} vs {w}");
            }
        }
    }

    #[test]
    fn injected_reduced_base_shows_the_worked_value() {
        let sys = example_circuit();
        let (red, _) = reduce(&sys, default_eps(sys.base()));
        let injected =
            TimeVaryingSystem::inject_into(red.reduced(), red.vars(), 0.5).unwrap();
        assert!((injected.get(2, 2) - 2160.0).abs() < 1e-9);
    }

    #[test]
    fn finishing_matches_a_full_solve_of_the_injected_system() {
        let sys = example_circuit();
        let eps = default_eps(sys.base());
        let (red, _) = reduce(&sys, eps);
        for step in 0..8 {
            let t = step as f64 * 0.13;
            let full = gauss_jordan_serial(&sys.inject(t).unwrap(), eps).unwrap();
            let finished = finish_solve(&red, t, Kernel::Serial, eps).unwrap();
            for (f, g) in full
                .solution
                .as_slice()
                .iter()
                .zip(finished.solution.as_slice())
            {
                let scale = f.abs().max(1.0);
                assert!((f - g).abs() / scale < 1e-10, "t={t}: {f} vs {g}");
            }
        }
    }

    #[test]
    fn finish_refuses_an_incomplete_reduction_until_clamped() {
        // Column 1 is dead within the boundary (row 2 may not be swapped
        // in — it lies beyond the boundary), so reduction stops early.
        let base = AugmentedMatrix::from_rows(&[
            vec![1.0, 0.0, 2.0, 3.0],
            vec![0.0, 0.0, 1.0, 4.0],
            vec![0.0, 5.0, 1.0, 6.0],
        ])
        .unwrap();
        let sys = TimeVaryingSystem::new(base, vec![var_at(2, 2)]).unwrap();
        assert_eq!(compute_boundary(&sys), 2);
        let (red, _) = reduce(&sys, 1e-12);
        assert_eq!(red.completed(), 1);
        assert!(matches!(
            finish_solve(&red, 0.0, Kernel::Serial, 1e-12),
            Err(Error::IncompleteReduction {
                completed: 1,
                boundary: 2
            })
        ));
        // Clamping salvages the one completed iteration; the finishing solve
        // may swap freely below the new boundary and recovers column 1 from
        // row 2.
        let red = red.clamped_to_completed();
        let out = finish_solve(&red, 0.0, Kernel::Serial, 1e-12).unwrap();
        let injected = sys.inject(0.0).unwrap();
        let want = oracle_solve(&injected).unwrap();
        for (g, w) in out.solution.as_slice().iter().zip(want.as_slice()) {
            assert!((g - w).abs() < 1e-9);
        }
    }

    #[test]
    fn boundary_n_reduction_is_a_complete_solve() {
        let a = AugmentedMatrix::from_rows(&[
            vec![2.0, 1.0, 5.0],
            vec![1.0, 3.0, 10.0],
        ])
        .unwrap();
        let sys = TimeVaryingSystem::new(a.clone(), vec![]).unwrap();
        let eps = default_eps(&a);
        let (red, _) = reduce(&sys, eps);
        assert_eq!(red.boundary(), 2);
        assert_eq!(red.completed(), 2);
        let out = finish_solve(&red, 0.0, Kernel::Serial, eps).unwrap();
        let direct = gauss_jordan_serial(&a, eps).unwrap();
        assert_eq!(out.solution.as_slice(), direct.solution.as_slice());
        // Finishing had nothing left to do.
        assert_eq!(out.counters.element_updates(), 0);
    }

    #[test]
    fn finishing_cost_scales_with_the_square_of_remaining_columns() {
        // For dense inputs with no skips, finishing r columns costs
        // n * r * (r + 3) / 2 element updates exactly.
        let n = 64;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..=n)
                    .map(|j| {
                        let h = (i as u64)
                            .wrapping_mul(0x9e3779b97f4a7c15)
                            .wrapping_add(j as u64)
                            .wrapping_mul(0xbf58476d1ce4e5b9);
                        let v = ((h >> 30) % 2001) as f64 / 100.0 - 10.0;
                        if i == j {
                            v + 10.0 * n as f64
                        } else {
                            v
                        }
                    })
                    .collect()
            })
            .collect();
        let base = AugmentedMatrix::from_rows(&rows).unwrap();
        for boundary in [0usize, 16, 32, 48] {
            let sys = TimeVaryingSystem::new(
                base.clone(),
                vec![VariableEntry {
                    row: boundary.min(n - 1),
                    col: boundary.min(n - 1),
                    func: TimeFunction::Constant { value: 0.5 },
                }],
            )
            .unwrap();
            let eps = default_eps(&base);
            let (red, _) = reduce(&sys, eps);
            let out = finish_solve(&red, 0.0, Kernel::Serial, eps).unwrap();
            let r = (n - red.boundary()) as u64;
            let want = n as u64 * r * (r + 3) / 2;
            assert_eq!(
                out.counters.element_updates(),
                want,
                "boundary {boundary}"
            );
        }
    }

    #[test]
    fn resumed_reduction_finishes_like_the_original() {
        let sys = example_circuit();
        let eps = default_eps(sys.base());
        let (red, _) = reduce(&sys, eps);
        let mut buf = Vec::new();
        crate::textio::write_reduction(&mut buf, &red).unwrap();
        let (back, beta) = crate::textio::read_system_with_beta(buf.as_slice()).unwrap();
        let resumed = ReductionResult::resume(&back, beta.unwrap()).unwrap();
        let original = finish_solve(&red, 0.5, Kernel::Serial, eps).unwrap();
        let restored = finish_solve(&resumed, 0.5, Kernel::Serial, eps).unwrap();
        // The text round trip is bit-exact, so the finishes are too.
        assert_eq!(
            original.solution.as_slice(),
            restored.solution.as_slice()
        );
        // A recorded boundary past the variable-derived limit is refused.
        assert!(matches!(
            ReductionResult::resume(&back, 3),
            Err(Error::InvalidConfig { .. })
        ));
    }
}
