//! Dense augmented-matrix storage plus the scalar bookkeeping every solver
//! kernel shares.
//!
//! An [`AugmentedMatrix`] is an n x (n+1) row-major block of `f64`: columns
//! `0..n` hold coefficients, column `n` holds the free terms. Row-major
//! contiguous storage is deliberate — the parallel kernel hands each worker
//! a contiguous run of rows as one `&mut [f64]`, which keeps the whole
//! multi-threaded solve in safe code.
//!
//! The two row primitives at the bottom ([`normalize_tail`],
//! [`eliminate_tail`]) are the only places the kernels do arithmetic on
//! rows. Serial, parallel, and finishing solves all funnel through them, so
//! equal inputs produce bit-identical outputs regardless of which kernel ran
//! (provided no row swaps occurred, which can reorder the arithmetic).

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedMatrix {
    n: usize,
    data: Vec<f64>,
}

impl AugmentedMatrix {
    /// Builds a matrix from `n` rows of `n + 1` finite entries.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyMatrix);
        }
        let n = rows.len();
        let width = n + 1;
        let mut data = Vec::with_capacity(n * width);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(Error::RowLength {
                    row: i,
                    got: row.len(),
                    expected: width,
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite {
                        row: i,
                        col: j,
                        value: v,
                    });
                }
                data.push(v);
            }
        }
        Ok(Self { n, data })
    }

    /// An all-zero system of the given order.
    pub fn zeros(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyMatrix);
        }
        Ok(Self {
            n,
            data: vec![0.0; n * (n + 1)],
        })
    }

    /// System order n (the matrix has n rows and n + 1 columns).
    pub fn n(&self) -> usize {
        self.n
    }

    /// Row width, always `n + 1`.
    pub fn width(&self) -> usize {
        self.n + 1
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        debug_assert!(row < self.n && col <= self.n);
        self.data[row * (self.n + 1) + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.n && col <= self.n);
        self.data[row * (self.n + 1) + col] = value;
    }

    #[inline]
    pub fn row(&self, row: usize) -> &[f64] {
        let w = self.n + 1;
        &self.data[row * w..(row + 1) * w]
    }

    #[inline]
    pub fn row_mut(&mut self, row: usize) -> &mut [f64] {
        let w = self.n + 1;
        &mut self.data[row * w..(row + 1) * w]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n + 1)
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let w = self.n + 1;
        let (lo, hi) = (a.min(b), a.max(b));
        let (head, tail) = self.data.split_at_mut(hi * w);
        head[lo * w..(lo + 1) * w].swap_with_slice(&mut tail[..w]);
    }

    /// Copies column n out; after a completed solve this is the solution.
    pub fn free_terms(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, self.n)).collect()
    }

    /// Max-absolute-row-sum norm over the coefficient block (column n is
    /// excluded); used to scale the default pivot tolerance.
    pub fn coefficient_inf_norm(&self) -> f64 {
        self.rows()
            .map(|r| r[..self.n].iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Raw storage, for carving into per-worker row blocks.
    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

/// Pivot tolerance scaled to the matrix at hand: any candidate pivot with
/// magnitude at or below this counts as zero. `1e-12` of the coefficient
/// norm keeps the test meaningful for systems far from unit scale (circuit
/// matrices mix order-1 and order-10^4 entries).
pub fn default_eps(a: &AugmentedMatrix) -> f64 {
    1e-12 * a.coefficient_inf_norm().max(1.0)
}

// ======================================================================
// Operation counters
// ======================================================================

/// Tallies of the work a solve performed.
///
/// `element_updates` counts scalar multiply-add/divide operations; a row
/// operation over the active window of iteration `i` (columns `i..=n`)
/// contributes `n + 1 - i` of them, whether it is the pivot normalization or
/// an add-multiple into another row. `row_ops` counts whole-row operations:
/// one per applied scaling, one per add-multiple, one per swap (swaps move
/// no scalars, so they add nothing to `element_updates`).
///
/// Counters are plain integers, not atomics: each parallel worker owns one
/// and the orchestrator merges them after the join.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct OpCounter {
    element_updates: u64,
    row_ops: u64,
}

impl OpCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn element_updates(&self) -> u64 {
        self.element_updates
    }

    pub fn row_ops(&self) -> u64 {
        self.row_ops
    }

    pub fn reset(&mut self) {
        *self = Self::default();
    }

    /// One row-level operation spanning `window` scalar slots.
    pub(crate) fn record_row_update(&mut self, window: usize) {
        self.element_updates += window as u64;
        self.row_ops += 1;
    }

    pub(crate) fn record_swap(&mut self) {
        self.row_ops += 1;
    }

    pub fn merge(&mut self, other: &OpCounter) {
        self.element_updates += other.element_updates;
        self.row_ops += other.row_ops;
    }
}

// ======================================================================
// Solutions
// ======================================================================

/// A solved state vector; construction checks every component is finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    values: Vec<f64>,
}

impl Solution {
    pub(crate) fn new(values: Vec<f64>) -> Result<Self> {
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    row: i,
                    col: values.len(),
                    value: v,
                });
            }
        }
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }
}

// ======================================================================
// Row primitives
// ======================================================================

/// Scales `row` so the pivot slot becomes exactly 1, multiplying the tail
/// (columns right of the pivot) by the reciprocal. Returns `false` without
/// touching anything when the pivot is already exactly 1 — the skip both
/// saves work and keeps op counts faithful to what actually ran.
///
/// The pivot slot is written as a literal `1.0` rather than `a / a`, so the
/// published pivot row is exact regardless of rounding in the reciprocal.
#[inline]
pub(crate) fn normalize_tail(row: &mut [f64], pivot_col: usize) -> bool {
    let pivot = row[pivot_col];
    if pivot == 1.0 {
        return false;
    }
    let inv = 1.0 / pivot;
    row[pivot_col] = 1.0;
    for v in &mut row[pivot_col + 1..] {
        *v *= inv;
    }
    true
}

/// Subtracts `multiplier * pivot_tail` from `row`'s tail and zeroes the
/// pivot-column slot, where `pivot_tail` holds the (normalized) pivot row's
/// columns `pivot_col + 1 ..= n`. Returns `false` and does nothing when the
/// multiplier is exactly zero — the skip rule that makes sparse systems
/// cheap.
///
/// The pivot-column slot is written as a literal `0.0`: with a unit pivot
/// the subtraction `a - a * 1` is exact, so this writes the value the
/// arithmetic would produce anyway.
#[inline]
pub(crate) fn eliminate_tail(row: &mut [f64], pivot_tail: &[f64], pivot_col: usize) -> bool {
    let multiplier = row[pivot_col];
    if multiplier == 0.0 {
        return false;
    }
    row[pivot_col] = 0.0;
    for (r, p) in row[pivot_col + 1..].iter_mut().zip(pivot_tail) {
        *r -= multiplier * p;
    }
    true
}
