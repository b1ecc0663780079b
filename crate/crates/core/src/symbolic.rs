//! Symbolic audit of partial reduction.
//!
//! Reduction runs on the *constant* parts only — the machine never sees a
//! variable's value. That is safe exactly when no performed row operation
//! mixes variable data into the constants it reshuffles:
//!
//! * scaling a row that carries a variable term would divide the term's
//!   coefficient (and a variable pivot would make the reciprocal itself
//!   wrong);
//! * adding a multiple of a variable-bearing pivot row would smear the term
//!   across other rows, and a variable sitting in the pivot column is a
//!   wrong multiplier whether its constant part is zero (silently skipped)
//!   or not;
//! * swapping a variable-bearing row moves the term to a slot its stored
//!   position no longer matches.
//!
//! [`symbolic_reduce_check`] replays the exact operation sequence of
//! [`gauss_jordan_partial`](crate::gauss_jordan_partial) over
//! [`SymbolicEntry`] values — constant plus a map of variable coefficients —
//! and reports the first operation that violates a rule. When the boundary
//! comes from [`compute_boundary`](crate::compute_boundary), no variable
//! ever sits in a scaled row, a pivot row, a pivot column, or a swapped
//! row, so every coefficient stays at its literal initial value 1 — which
//! is precisely why injection after reduction is mere addition.

use std::collections::BTreeMap;

use crate::matrix::AugmentedMatrix;
use crate::system::TimeVaryingSystem;

/// One matrix cell as the checker sees it: a constant plus a linear
/// combination of variable entries. Keys are indices into
/// [`TimeVaryingSystem::vars`]; validity requires every present coefficient
/// to be exactly 1 (a variable is whole and in its original cell).
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicEntry {
    pub constant: f64,
    pub var_terms: BTreeMap<usize, f64>,
}

impl SymbolicEntry {
    fn constant(c: f64) -> Self {
        Self {
            constant: c,
            var_terms: BTreeMap::new(),
        }
    }

    pub fn has_vars(&self) -> bool {
        !self.var_terms.is_empty()
    }
}

/// The first rule an attempted reduction broke.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Normalizing pivot row `pivot` would rescale a variable term (the
    /// term at column `var_col`; when `var_col == pivot` the pivot value
    /// itself is variable and the computed reciprocal is already wrong).
    ScalesVariableRow { pivot: usize, var_col: usize },
    /// An add-multiple from pivot row `pivot` into row `target` would smear
    /// the pivot row's variable term at `var_col` into `target`.
    AddsVariablePivotRow {
        pivot: usize,
        target: usize,
        var_col: usize,
    },
    /// Row `target`'s entry in pivot column `pivot` carries a variable: the
    /// multiplier the machine uses (its constant part) is wrong, or — when
    /// that constant is zero — the elimination is silently skipped and the
    /// column keeps a variable above/below the pivot.
    VariableMultiplier { pivot: usize, target: usize },
    /// A pivot swap would move variable-bearing row `row` into slot
    /// `pivot`, detaching its terms from their stored positions.
    SwapsVariableRow { pivot: usize, row: usize },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::ScalesVariableRow { pivot, var_col } => write!(
                f,
                "iteration {pivot}: scaling row {pivot} would rescale its variable term at column {var_col}"
            ),
            Violation::AddsVariablePivotRow {
                pivot,
                target,
                var_col,
            } => write!(
                f,
                "iteration {pivot}: adding pivot row into row {target} would smear the variable at column {var_col}"
            ),
            Violation::VariableMultiplier { pivot, target } => write!(
                f,
                "iteration {pivot}: row {target}'s multiplier in the pivot column is time-varying"
            ),
            Violation::SwapsVariableRow { pivot, row } => write!(
                f,
                "iteration {pivot}: swap would move variable-bearing row {row} into the pivot slot"
            ),
        }
    }
}

/// Outcome of the audit.
#[derive(Debug, Clone, PartialEq)]
pub enum ReduceCheck {
    /// Every performed operation was safe. `completed` mirrors what the
    /// real reduction would return; `matrix` is the final symbolic state.
    Valid {
        completed: usize,
        matrix: Vec<Vec<SymbolicEntry>>,
    },
    Invalid { violation: Violation },
}

impl ReduceCheck {
    pub fn is_valid(&self) -> bool {
        matches!(self, ReduceCheck::Valid { .. })
    }
}

fn symbolic_matrix(sys: &TimeVaryingSystem) -> Vec<Vec<SymbolicEntry>> {
    let base: &AugmentedMatrix = sys.base();
    let n = base.n();
    let mut m: Vec<Vec<SymbolicEntry>> = (0..n)
        .map(|i| base.row(i).iter().copied().map(SymbolicEntry::constant).collect())
        .collect();
    for (id, v) in sys.vars().iter().enumerate() {
        m[v.row][v.col].var_terms.insert(id, 1.0);
    }
    m
}

/// Replays the reduction to `boundary` symbolically and reports whether
/// every operation the real kernel would perform is valid. The replay uses
/// the same pivot tolerance, the same swap bound, and the same skip rules,
/// so it audits exactly the operation sequence that would run.
pub fn symbolic_reduce_check(sys: &TimeVaryingSystem, boundary: usize, eps: f64) -> ReduceCheck {
    let n = sys.n();
    assert!(boundary <= n, "boundary {boundary} exceeds order {n}");
    let mut m = symbolic_matrix(sys);

    for i in 0..boundary {
        // Pivot selection, swap bounded by the boundary.
        if m[i][i].constant.abs() <= eps {
            let found = (i + 1..boundary).find(|&j| m[j][i].constant.abs() > eps);
            match found {
                Some(j) => {
                    if let Some(row) = [i, j].into_iter().find(|&r| row_has_vars(&m[r])) {
                        return ReduceCheck::Invalid {
                            violation: Violation::SwapsVariableRow { pivot: i, row },
                        };
                    }
                    m.swap(i, j);
                }
                None => return ReduceCheck::Valid {
                    completed: i,
                    matrix: m,
                },
            }
        }

        // Scaling, skipped for an exactly-unit pivot constant.
        if m[i][i].constant != 1.0 {
            if let Some(var_col) = m[i].iter().position(SymbolicEntry::has_vars) {
                return ReduceCheck::Invalid {
                    violation: Violation::ScalesVariableRow { pivot: i, var_col },
                };
            }
            let inv = 1.0 / m[i][i].constant;
            m[i][i].constant = 1.0;
            for cell in &mut m[i][i + 1..] {
                cell.constant *= inv;
            }
        }

        // Add-multiples into every other row.
        for k in 0..n {
            if k == i {
                continue;
            }
            if m[k][i].has_vars() {
                return ReduceCheck::Invalid {
                    violation: Violation::VariableMultiplier { pivot: i, target: k },
                };
            }
            let multiplier = m[k][i].constant;
            if multiplier == 0.0 {
                continue;
            }
            if let Some(var_col) = m[i].iter().position(SymbolicEntry::has_vars) {
                return ReduceCheck::Invalid {
                    violation: Violation::AddsVariablePivotRow {
                        pivot: i,
                        target: k,
                        var_col,
                    },
                };
            }
            m[k][i].constant = 0.0;
            for col in i + 1..=n {
                let p = m[i][col].constant;
                m[k][col].constant -= multiplier * p;
            }
        }
    }

    ReduceCheck::Valid {
        completed: boundary,
        matrix: m,
    }
}

fn row_has_vars(row: &[SymbolicEntry]) -> bool {
    row.iter().any(SymbolicEntry::has_vars)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::default_eps;
    use crate::reduction::{compute_boundary, gauss_jordan_partial, reduce};
    use crate::simulation::example_circuit;
    use crate::system::{TimeFunction, TimeVaryingSystem, VariableEntry};
    use crate::matrix::OpCounter;

    fn var_at(row: usize, col: usize) -> VariableEntry {
        VariableEntry {
            row,
            col,
            func: TimeFunction::Constant { value: 1.0 },
        }
    }

    #[test]
    fn circuit_reduction_is_valid_and_keeps_the_variable_whole() {
        let sys = example_circuit();
        let eps = default_eps(sys.base());
        match symbolic_reduce_check(&sys, 2, eps) {
            ReduceCheck::Valid { completed, matrix } => {
                assert_eq!(completed, 2);
                let cell = &matrix[2][2];
                assert!((cell.constant - 360.0).abs() < 1e-12);
                assert_eq!(cell.var_terms.len(), 1);
                assert_eq!(cell.var_terms[&0], 1.0);
                // No other cell picked up a variable term.
                let stray = matrix
                    .iter()
                    .flatten()
                    .filter(|c| c.has_vars())
                    .count();
                assert_eq!(stray, 1);
            }
            other => panic!("expected valid, got {other:?}"),
        }
    }

    #[test]
    fn symbolic_constants_track_the_real_reduction() {
        let sys = example_circuit();
        let eps = default_eps(sys.base());
        let ReduceCheck::Valid { matrix, .. } = symbolic_reduce_check(&sys, 2, eps) else {
            panic!("expected valid");
        };
        let mut real = sys.base().clone();
        let mut c = OpCounter::new();
        gauss_jordan_partial(&mut real, 2, eps, &mut c);
        for i in 0..3 {
            for j in 0..=3 {
                assert_eq!(matrix[i][j].constant.to_bits(), real.get(i, j).to_bits());
            }
        }
    }

    #[test]
    fn overreaching_boundary_hits_the_variable_pivot() {
        // One column past the safe boundary: iteration 2 must scale row 2,
        // which carries the variable resistance.
        let sys = example_circuit();
        let eps = default_eps(sys.base());
        match symbolic_reduce_check(&sys, 3, eps) {
            ReduceCheck::Invalid {
                violation: Violation::ScalesVariableRow { pivot: 2, var_col: 2 },
            } => {}
            other => panic!("expected a scaling violation, got {other:?}"),
        }
    }

    #[test]
    fn unit_variable_pivot_is_caught_at_the_addition() {
        // Pivot constant is exactly 1, so scaling is skipped; the violation
        // surfaces when the variable-bearing pivot row is about to be added
        // into row 1.
        let base = AugmentedMatrix::from_rows(&[
            vec![1.0, 5.0, 3.0],
            vec![2.0, 4.0, 6.0],
        ])
        .unwrap();
        let sys = TimeVaryingSystem::new(base, vec![var_at(0, 1)]).unwrap();
        match symbolic_reduce_check(&sys, 1, 1e-12) {
            ReduceCheck::Invalid {
                violation:
                    Violation::AddsVariablePivotRow {
                        pivot: 0,
                        target: 1,
                        var_col: 1,
                    },
            } => {}
            other => panic!("expected a pivot-row violation, got {other:?}"),
        }
    }

    #[test]
    fn variable_in_the_pivot_column_is_rejected_even_with_zero_constant() {
        // The machine would skip row 1 (constant 0) and leave the variable
        // standing in an eliminated column.
        let base = AugmentedMatrix::from_rows(&[
            vec![2.0, 1.0, 3.0],
            vec![0.0, 4.0, 6.0],
        ])
        .unwrap();
        let sys = TimeVaryingSystem::new(base, vec![var_at(1, 0)]).unwrap();
        match symbolic_reduce_check(&sys, 1, 1e-12) {
            ReduceCheck::Invalid {
                violation: Violation::VariableMultiplier { pivot: 0, target: 1 },
            } => {}
            other => panic!("expected a multiplier violation, got {other:?}"),
        }
    }

    #[test]
    fn swapping_in_a_variable_row_is_rejected() {
        let base = AugmentedMatrix::from_rows(&[
            vec![0.0, 2.0, 3.0],
            vec![5.0, 4.0, 6.0],
        ])
        .unwrap();
        let sys = TimeVaryingSystem::new(base, vec![var_at(1, 1)]).unwrap();
        match symbolic_reduce_check(&sys, 2, 1e-12) {
            ReduceCheck::Invalid {
                violation: Violation::SwapsVariableRow { pivot: 0, row: 1 },
            } => {}
            other => panic!("expected a swap violation, got {other:?}"),
        }
    }

    #[test]
    fn early_return_mirrors_the_real_kernel() {
        let base = AugmentedMatrix::from_rows(&[
            vec![1.0, 0.0, 2.0, 3.0],
            vec![0.0, 0.0, 1.0, 4.0],
            vec![0.0, 0.0, 5.0, 6.0],
        ])
        .unwrap();
        let sys = TimeVaryingSystem::new(base, vec![var_at(2, 3)]).unwrap();
        match symbolic_reduce_check(&sys, 2, 1e-12) {
            ReduceCheck::Valid { completed, .. } => assert_eq!(completed, 1),
            other => panic!("expected early valid return, got {other:?}"),
        }
    }

    #[test]
    fn computed_boundaries_are_always_valid() {
        // The derived boundary must be safe by construction, wherever the
        // variables land.
        let n = 7;
        for seed in 0u64..60 {
            let mut h = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
            let mut next = || {
                h ^= h >> 27;
                h = h.wrapping_mul(0x3c79ac492ba7b653);
                h ^= h >> 33;
                h
            };
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|i| {
                    (0..=n)
                        .map(|j| {
                            let v = (next() % 2001) as f64 / 100.0 - 10.0;
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
            let mut vars = Vec::new();
            for _ in 0..1 + next() as usize % 3 {
                let row = next() as usize % n;
                let col = next() as usize % n;
                if vars
                    .iter()
                    .all(|v: &VariableEntry| (v.row, v.col) != (row, col))
                {
                    vars.push(var_at(row, col));
                }
            }
            let sys = TimeVaryingSystem::new(base, vars).unwrap();
            let eps = default_eps(sys.base());
            let boundary = compute_boundary(&sys);
            let check = symbolic_reduce_check(&sys, boundary, eps);
            assert!(check.is_valid(), "seed {seed}: {check:?}");
            if let ReduceCheck::Valid { completed, matrix } = check {
                let (red, _) = reduce(&sys, eps);
                assert_eq!(completed, red.completed());
                // Valid operations never touch a coefficient: all exactly 1.
                for cell in matrix.iter().flatten() {
                    for (&id, &coef) in &cell.var_terms {
                        assert_eq!(coef, 1.0, "seed {seed}, var {id}");
                    }
                }
            }
        }
    }
}
