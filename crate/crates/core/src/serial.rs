//! Sequential Gauss-Jordan elimination to reduced row-echelon form.
//!
//! One pass of pivots `0 .. n`; at pivot `i` only the *active window* —
//! columns `i ..= n` — is read or written, because every column left of `i`
//! is already a unit basis column and stays that way. Two skip rules keep
//! sparse inputs cheap without changing results: a pivot row that already
//! has a unit pivot is not rescaled, and a row with an exactly-zero
//! multiplier is not touched at all.
//!
//! Row swaps happen only on demand: when a pivot's magnitude is within
//! `eps` of zero, the nearest row below with a usable entry is swapped in
//! (no full partial-pivoting search). With no swaps, the pivot sequence is
//! exactly the diagonal.

use crate::error::{Error, Result};
use crate::matrix::{eliminate_tail, normalize_tail, AugmentedMatrix, OpCounter, Solution};

/// Result of a completed solve, whichever kernel produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub solution: Solution,
    pub swaps_performed: usize,
    pub counters: OpCounter,
}

/// One Gauss-Jordan iteration: normalize pivot row `i`, then subtract the
/// scaled pivot row from every other row with a nonzero multiplier in
/// column `i`. Rows above `i` get their back-substitution here, which is
/// why a completed pass needs no separate solve stage.
///
/// Caller must have secured a usable pivot (`|a[i][i]| > eps`).
pub fn iterate(a: &mut AugmentedMatrix, i: usize, counters: &mut OpCounter) {
    let n = a.n();
    let width = a.width();
    let window = width - i;
    let data = a.data_mut();

    let (above, rest) = data.split_at_mut(i * width);
    let (pivot_row, below) = rest.split_at_mut(width);
    if normalize_tail(pivot_row, i) {
        counters.record_row_update(window);
    }
    let tail = &pivot_row[i + 1..];

    for row in above.chunks_exact_mut(width) {
        if eliminate_tail(row, tail, i) {
            counters.record_row_update(window);
        }
    }
    for row in below.chunks_exact_mut(width) {
        if eliminate_tail(row, tail, i) {
            counters.record_row_update(window);
        }
    }
    debug_assert_eq!(a.n(), n);
}

/// Smallest row index in `(i, bound)` whose entry in column `i` exceeds the
/// tolerance; `None` when every candidate is effectively zero.
pub fn find_swap_row(a: &AugmentedMatrix, i: usize, bound: usize, eps: f64) -> Option<usize> {
    (i + 1..bound).find(|&j| a.get(j, i).abs() > eps)
}

/// Runs pivots `first_pivot .. n` in place. Shared by the full serial solve
/// (`first_pivot = 0`) and the finishing solve after a partial reduction.
/// Returns the number of row swaps performed.
pub(crate) fn solve_from(
    a: &mut AugmentedMatrix,
    first_pivot: usize,
    eps: f64,
    counters: &mut OpCounter,
) -> Result<usize> {
    let n = a.n();
    let mut swaps = 0;
    for i in first_pivot..n {
        if a.get(i, i).abs() <= eps {
            let j = find_swap_row(a, i, n, eps).ok_or(Error::Singular { pivot: i })?;
            a.swap_rows(i, j);
            counters.record_swap();
            swaps += 1;
        }
        iterate(a, i, counters);
    }
    Ok(swaps)
}

/// Full sequential solve. The input is untouched; the working copy ends in
/// reduced row-echelon form and its free-term column is the solution.
pub fn gauss_jordan_serial(a: &AugmentedMatrix, eps: f64) -> Result<SolveOutcome> {
    let mut work = a.clone();
    let mut counters = OpCounter::new();
    let swaps_performed = solve_from(&mut work, 0, eps, &mut counters)?;
    Ok(SolveOutcome {
        solution: Solution::new(work.free_terms())?,
        swaps_performed,
        counters,
    })
}
