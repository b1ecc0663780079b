//! Publish-once / read-many storage for normalized pivot rows.
//!
//! During a block-parallel solve, the worker that normalizes pivot row `i`
//! publishes the row's tail — columns `i+1 ..= n`, everything right of the
//! unit pivot — exactly once. Every other worker reads that tail many times
//! and never writes it. [`PivotMatrix`] encodes the discipline directly:
//!
//! * storage is a flat triangle of `AtomicU64` cells holding `f64` bits, so
//!   readers and the writer never form a data race the compiler can't see;
//! * a per-row state flag is raised with `Release` ordering after the cell
//!   stores, and readers check it with `Acquire` before touching the tail —
//!   the classic message-passing pair that makes the published values (and
//!   nothing less) visible;
//! * publishing a row twice is a protocol violation and panics.
//!
//! Row `i` stores `n - i` values. Rows `0 ..= n-2` are genuine tails; the
//! final row's single slot holds its normalized free term, kept so the last
//! unknown is readable from the same structure (it is excluded from
//! [`pivot_capacity`], which counts only the tails the elimination below
//! needs).

use std::sync::atomic::{AtomicU64, AtomicU8, Ordering};

const EMPTY: u8 = 0;
const WRITING: u8 = 1;
const READY: u8 = 2;

/// Tail slots needed for pivot rows `0 ..= n-2`: sum of `n - i`, which
/// closes to `(n - 1)(n + 2) / 2`. Zero for the degenerate order-1 system.
pub fn pivot_capacity(n: usize) -> usize {
    (n - 1) * (n + 2) / 2
}

pub struct PivotMatrix {
    n: usize,
    /// Start of row i's tail in `cells`; row i occupies `n - i` slots.
    offsets: Vec<usize>,
    cells: Vec<AtomicU64>,
    state: Vec<AtomicU8>,
}

impl PivotMatrix {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "pivot matrix needs order >= 1");
        let mut offsets = Vec::with_capacity(n);
        let mut total = 0;
        for i in 0..n {
            offsets.push(total);
            total += n - i;
        }
        let mut cells = Vec::with_capacity(total);
        cells.resize_with(total, || AtomicU64::new(0));
        let mut state = Vec::with_capacity(n);
        state.resize_with(n, || AtomicU8::new(EMPTY));
        Self {
            n,
            offsets,
            cells,
            state,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Tail length for pivot row `i`.
    pub fn tail_len(&self, i: usize) -> usize {
        assert!(i < self.n);
        self.n - i
    }

    fn row_cells(&self, i: usize) -> &[AtomicU64] {
        let start = self.offsets[i];
        &self.cells[start..start + (self.n - i)]
    }

    /// Publishes pivot row `i`'s tail. Panics on a second publish of the
    /// same row or a tail of the wrong length — both are bugs in the caller,
    /// not runtime conditions.
    pub fn publish_row(&self, i: usize, tail: &[f64]) {
        assert_eq!(tail.len(), self.tail_len(i), "tail length mismatch");
        self.state[i]
            .compare_exchange(EMPTY, WRITING, Ordering::Acquire, Ordering::Relaxed)
            .unwrap_or_else(|_| panic!("pivot row {i} published twice"));
        for (cell, &v) in self.row_cells(i).iter().zip(tail) {
            cell.store(v.to_bits(), Ordering::Relaxed);
        }
        self.state[i].store(READY, Ordering::Release);
    }

    /// Whether row `i` has been published (acquire: a `true` result makes
    /// the tail contents visible to this thread).
    pub fn is_ready(&self, i: usize) -> bool {
        self.state[i].load(Ordering::Acquire) == READY
    }

    /// Copies row `i`'s tail into `out` if published; `false` leaves `out`
    /// untouched. Bit patterns round-trip exactly — what was published is
    /// what is read.
    pub fn read_into(&self, i: usize, out: &mut Vec<f64>) -> bool {
        if !self.is_ready(i) {
            return false;
        }
        out.clear();
        out.extend(
            self.row_cells(i)
                .iter()
                .map(|c| f64::from_bits(c.load(Ordering::Relaxed))),
        );
        true
    }

    /// Allocating convenience form of [`read_into`](Self::read_into).
    pub fn read(&self, i: usize) -> Option<Vec<f64>> {
        let mut out = Vec::new();
        self.read_into(i, &mut out).then_some(out)
    }

    /// Scalar accessor into a published tail; `offset` 0 is column `i + 1`.
    /// Panics if the row is not ready.
    pub fn tail_element(&self, i: usize, offset: usize) -> f64 {
        assert!(self.is_ready(i), "pivot row {i} not published");
        f64::from_bits(self.row_cells(i)[offset].load(Ordering::Relaxed))
    }

    /// Elements actually stored in rows `0 ..= n-2`; after a full solve this
    /// equals [`pivot_capacity`]`(n)`.
    pub fn stored_elements(&self) -> usize {
        (0..self.n.saturating_sub(1))
            .filter(|&i| self.is_ready(i))
            .map(|i| self.n - i)
            .sum()
    }
}

impl std::fmt::Debug for PivotMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PivotMatrix")
            .field("n", &self.n)
            .field("ready_rows", &(0..self.n).filter(|&i| self.is_ready(i)).count())
            .finish()
    }
}
