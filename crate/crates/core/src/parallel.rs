//! Row-block parallel Gauss-Jordan elimination.
//!
//! The n rows are split into `p` contiguous blocks, one worker per block.
//! Every worker makes the same three-phase sweep over pivot columns:
//!
//! * **pre-diagonal** — for each pivot left of the block, wait for the
//!   normalized pivot row to appear in the shared [`PivotMatrix`], then
//!   eliminate that column from every owned row;
//! * **diagonal** — for each owned pivot, secure a usable pivot value,
//!   normalize the row, publish its tail, then apply it to all owned rows
//!   (rows below get their elimination, rows above their back-substitution);
//! * **post-diagonal** — for each pivot right of the block, wait for the
//!   published row and apply it to every owned row.
//!
//! Workers never write rows outside their block. The one place row content
//! crosses a block boundary — a diagonal pivot that is zero through the end
//! of its own block — moves *values*, not ownership, through a rendezvous
//! cell ([`SwapChannel`]): the stuck worker posts its defective row, and the
//! first higher-rank worker holding a usable candidate row swaps contents
//! with it. Candidates are advertised on a per-row board that each worker
//! maintains for its own rows during the pre-diagonal phase: after applying
//! pivot `i` to a row, the row is flagged as a candidate for column `i + 1`
//! exactly when that entry is usable. Since a stuck column means later
//! pivots cannot have been published, every higher-rank worker is still in
//! its pre-diagonal phase, and the board is live precisely where donors can
//! come from.
//!
//! With one worker, or whenever no swap fires, the arithmetic performed on
//! each row is the same sequence the serial kernel would run, so results
//! are bit-identical to [`gauss_jordan_serial`](crate::gauss_jordan_serial).

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicBool, AtomicU8, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::matrix::{eliminate_tail, normalize_tail, AugmentedMatrix, OpCounter, Solution};
use crate::pivot::PivotMatrix;
use crate::serial::{find_swap_row, SolveOutcome};

/// Spin this many times on a not-yet-ready marker before yielding to the
/// scheduler; pivot publication latency is usually far below a time slice.
const SPIN_LIMIT: u32 = 128;

/// Board value for "this row is not currently a pivot candidate".
const NO_CANDIDATE: usize = usize::MAX;

// ======================================================================
// Partitioning
// ======================================================================

/// Contiguous block-of-rows assignment for `p` workers. Blocks differ in
/// size by at most one row; the remainder lands on the lowest ranks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionPlan {
    n: usize,
    starts: Vec<usize>, // length p + 1, starts[p] == n
}

impl PartitionPlan {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn threads(&self) -> usize {
        self.starts.len() - 1
    }

    /// Row range `[ds, de)` owned by `rank`.
    pub fn block(&self, rank: usize) -> std::ops::Range<usize> {
        self.starts[rank]..self.starts[rank + 1]
    }

    pub fn blocks(&self) -> impl Iterator<Item = std::ops::Range<usize>> + '_ {
        (0..self.threads()).map(|r| self.block(r))
    }
}

/// Splits `n` rows across `threads` workers. Errors when `threads` is zero
/// or exceeds `n` (a worker without rows has no block to own).
pub fn make_partition(n: usize, threads: usize) -> Result<PartitionPlan> {
    if threads == 0 || threads > n {
        return Err(Error::BadWorkerCount { threads, n });
    }
    let base = n / threads;
    let extra = n % threads;
    let mut starts = Vec::with_capacity(threads + 1);
    let mut at = 0;
    for rank in 0..threads {
        starts.push(at);
        at += base + usize::from(rank < extra);
    }
    starts.push(at);
    debug_assert_eq!(at, n);
    Ok(PartitionPlan { n, starts })
}

// ======================================================================
// Shared solver state
// ======================================================================

const CH_IDLE: u8 = 0;
const CH_NEEDED: u8 = 1;
const CH_CLAIMED: u8 = 2;
const CH_OFFERED: u8 = 3;

/// Rendezvous cell for the cross-block pivot exchange. At most one worker
/// can be stuck at a time (a stuck column blocks every later diagonal), so
/// one cell serves the whole solve.
struct SwapChannel {
    state: AtomicU8,
    needed_col: AtomicUsize,
    payload: Mutex<Vec<f64>>,
}

struct Shared {
    pivots: PivotMatrix,
    /// Per row: number of pivot columns applied so far. A requester stuck at
    /// column `j` may declare singularity only once every higher-block row
    /// shows progress `>= j` — at that point each row's candidacy for `j`
    /// has been decided and published.
    progress: Vec<AtomicUsize>,
    /// Per row: the column this row could serve as a pivot for, or
    /// [`NO_CANDIDATE`]. Written by the row's owner (release), read by a
    /// stuck requester after it has acquired the matching progress mark.
    candidate_for: Vec<AtomicUsize>,
    swap: SwapChannel,
    aborted: AtomicBool,
    error: Mutex<Option<Error>>,
}

impl Shared {
    fn new(n: usize, first_pivot: usize) -> Self {
        let mut progress = Vec::with_capacity(n);
        progress.resize_with(n, || AtomicUsize::new(first_pivot));
        let mut candidate_for = Vec::with_capacity(n);
        candidate_for.resize_with(n, || AtomicUsize::new(NO_CANDIDATE));
        Self {
            pivots: PivotMatrix::new(n),
            progress,
            candidate_for,
            swap: SwapChannel {
                state: AtomicU8::new(CH_IDLE),
                needed_col: AtomicUsize::new(NO_CANDIDATE),
                payload: Mutex::new(Vec::new()),
            },
            aborted: AtomicBool::new(false),
            error: Mutex::new(None),
        }
    }

    /// Records the first error and raises the abort flag so every wait loop
    /// unwinds instead of spinning on a pivot that will never arrive.
    fn abort_with(&self, e: Error) {
        {
            let mut slot = self.error.lock().unwrap();
            if slot.is_none() {
                *slot = Some(e);
            }
        }
        self.aborted.store(true, Ordering::Release);
    }

    fn abort_requested(&self) -> bool {
        self.aborted.load(Ordering::Acquire)
    }
}

fn secondary_abort() -> Error {
    Error::Aborted {
        reason: "another worker reported an error first".into(),
    }
}

// ======================================================================
// Per-worker statistics
// ======================================================================

/// Diagnostics for one worker: where its block sat, how long each phase
/// took, and how much arithmetic it performed.
#[derive(Debug, Clone)]
pub struct WorkerStats {
    pub rank: usize,
    pub first_row: usize,
    pub rows: usize,
    pub pre_ns: u64,
    pub diagonal_ns: u64,
    pub post_ns: u64,
    pub counters: OpCounter,
    pub swaps: usize,
}

/// Diagnostics for a whole parallel solve.
#[derive(Debug, Clone)]
pub struct ParallelStats {
    pub workers: Vec<WorkerStats>,
    /// Tail elements actually published for pivot rows `0 ..= n-2`.
    pub pivot_elements_stored: usize,
}

// ======================================================================
// Worker
// ======================================================================

struct Worker<'a> {
    rank: usize,
    ds: usize,
    de: usize,
    first_pivot: usize,
    n: usize,
    width: usize,
    eps: f64,
    rows: &'a mut [f64],
    shared: &'a Shared,
    tail_buf: Vec<f64>,
    counters: OpCounter,
    swaps: usize,
}

impl<'a> Worker<'a> {
    fn block_len(&self) -> usize {
        self.de - self.ds
    }

    #[inline]
    fn cell(&self, local: usize, col: usize) -> f64 {
        self.rows[local * self.width + col]
    }

    fn run(mut self) -> Result<WorkerStats> {
        let t0 = Instant::now();
        self.pre_diagonal()?;
        let t1 = Instant::now();
        self.diagonal()?;
        let t2 = Instant::now();
        self.post_diagonal()?;
        let t3 = Instant::now();
        Ok(WorkerStats {
            rank: self.rank,
            first_row: self.ds,
            rows: self.block_len(),
            pre_ns: (t1 - t0).as_nanos() as u64,
            diagonal_ns: (t2 - t1).as_nanos() as u64,
            post_ns: (t3 - t2).as_nanos() as u64,
            counters: self.counters,
            swaps: self.swaps,
        })
    }

    /// Pivots left of the block: wait, apply, and keep the candidate board
    /// current for this block's rows.
    fn pre_diagonal(&mut self) -> Result<()> {
        let width = self.width;
        for i in self.first_pivot..self.ds {
            self.wait_for_pivot(i, true)?;
            let mut tail = std::mem::take(&mut self.tail_buf);
            let mut tail_loaded = false;
            for local in 0..self.block_len() {
                let row = &mut self.rows[local * width..(local + 1) * width];
                let applied = if row[i] != 0.0 {
                    if !tail_loaded {
                        let ok = self.shared.pivots.read_into(i, &mut tail);
                        debug_assert!(ok, "pivot {i} vanished after ready");
                        tail_loaded = true;
                    }
                    eliminate_tail(row, &tail, i)
                } else {
                    false
                };
                if applied {
                    self.counters.record_row_update(width - i);
                }
                // Candidacy first, then progress: a requester reads progress
                // (acquire), then candidates, so the pair arrives in order.
                let global = self.ds + local;
                let next = i + 1;
                let flag = if next < self.n && row[next].abs() > self.eps {
                    next
                } else {
                    NO_CANDIDATE
                };
                self.shared.candidate_for[global].store(flag, Ordering::Release);
                self.shared.progress[global].store(next, Ordering::Release);
            }
            self.tail_buf = tail;
        }
        Ok(())
    }

    /// Owned pivots: secure, normalize, publish, apply block-locally.
    fn diagonal(&mut self) -> Result<()> {
        let width = self.width;
        for i in self.ds.max(self.first_pivot)..self.de {
            if i != self.first_pivot {
                self.acquire_diagonal_pivot(i)?;
                let local = i - self.ds;
                let row = &mut self.rows[local * width..(local + 1) * width];
                if normalize_tail(row, i) {
                    self.counters.record_row_update(width - i);
                }
                // Publish before touching the rest of the block: waiting
                // workers can start consuming this pivot immediately.
                self.shared.pivots.publish_row(i, &row[i + 1..]);
            }
            let local_pivot = i - self.ds;
            let (head, rest) = self.rows.split_at_mut(local_pivot * width);
            let (pivot_row, below) = rest.split_at_mut(width);
            let tail = &pivot_row[i + 1..];
            for row in head.chunks_exact_mut(width) {
                if eliminate_tail(row, tail, i) {
                    self.counters.record_row_update(width - i);
                }
            }
            for row in below.chunks_exact_mut(width) {
                if eliminate_tail(row, tail, i) {
                    self.counters.record_row_update(width - i);
                }
            }
        }
        Ok(())
    }

    /// Pivots right of the block: back-substitution sweeps.
    fn post_diagonal(&mut self) -> Result<()> {
        let width = self.width;
        for i in self.de.max(self.first_pivot)..self.n {
            self.wait_for_pivot(i, false)?;
            let mut tail = std::mem::take(&mut self.tail_buf);
            let mut tail_loaded = false;
            for local in 0..self.block_len() {
                let row = &mut self.rows[local * width..(local + 1) * width];
                if row[i] != 0.0 {
                    if !tail_loaded {
                        let ok = self.shared.pivots.read_into(i, &mut tail);
                        debug_assert!(ok, "pivot {i} vanished after ready");
                        tail_loaded = true;
                    }
                    if eliminate_tail(row, &tail, i) {
                        self.counters.record_row_update(width - i);
                    }
                }
            }
            self.tail_buf = tail;
        }
        Ok(())
    }

    /// Bounded spin then yield until pivot `i` is published. Pre-diagonal
    /// waiters double as swap donors: the only column a requester can be
    /// stuck on is exactly the one everyone above it is waiting for.
    fn wait_for_pivot(&mut self, i: usize, donor_duty: bool) -> Result<()> {
        let mut spins = 0u32;
        loop {
            if self.shared.pivots.is_ready(i) {
                return Ok(());
            }
            if self.shared.abort_requested() {
                return Err(secondary_abort());
            }
            if donor_duty {
                self.try_donate(i);
            }
            spins += 1;
            if spins < SPIN_LIMIT {
                std::hint::spin_loop();
            } else {
                std::thread::yield_now();
            }
        }
    }

    /// If a requester is stuck on the column we are waiting for and one of
    /// our rows is flagged for it, exchange row contents through the
    /// channel. Ownership of both slots is unchanged; the received row is
    /// already eliminated through column `i - 1` (board invariant) and its
    /// zero in column `i` makes the rest of our sweep skip it naturally.
    fn try_donate(&mut self, waiting_col: usize) {
        let ch = &self.shared.swap;
        if ch.state.load(Ordering::Acquire) != CH_NEEDED
            || ch.needed_col.load(Ordering::Relaxed) != waiting_col
        {
            return;
        }
        let donor_local = (0..self.block_len()).find(|&local| {
            self.shared.candidate_for[self.ds + local].load(Ordering::Relaxed) == waiting_col
        });
        let Some(local) = donor_local else { return };
        debug_assert!(self.cell(local, waiting_col).abs() > self.eps);
        if ch
            .state
            .compare_exchange(CH_NEEDED, CH_CLAIMED, Ordering::AcqRel, Ordering::Acquire)
            .is_err()
        {
            return; // someone else got there first
        }
        {
            let mut payload = ch.payload.lock().unwrap();
            debug_assert_eq!(payload.len(), self.width);
            let row = &mut self.rows[local * self.width..(local + 1) * self.width];
            payload.swap_with_slice(row);
        }
        self.shared.candidate_for[self.ds + local].store(NO_CANDIDATE, Ordering::Release);
        ch.state.store(CH_OFFERED, Ordering::Release);
    }

    /// Makes `|a[i][i]| > eps` hold for owned pivot row `i`: in order, the
    /// pivot as-is, the nearest usable row below inside the block, then a
    /// cross-block content exchange with any higher block that can flag a
    /// candidate. When every row at and below `i` has been decided and none
    /// is usable, the matrix is singular at column `i`.
    fn acquire_diagonal_pivot(&mut self, i: usize) -> Result<()> {
        let local = i - self.ds;
        if self.cell(local, i).abs() > self.eps {
            return Ok(());
        }
        for cand in local + 1..self.block_len() {
            if self.cell(cand, i).abs() > self.eps {
                let width = self.width;
                let (head, tail) = self.rows.split_at_mut(cand * width);
                head[local * width..(local + 1) * width].swap_with_slice(&mut tail[..width]);
                self.counters.record_swap();
                self.swaps += 1;
                return Ok(());
            }
        }

        // Post the defective row and wait for a donor (or proof there isn't
        // one). The posted content is what the donor's slot will take over.
        let ch = &self.shared.swap;
        {
            let mut payload = ch.payload.lock().unwrap();
            payload.clear();
            payload.extend_from_slice(&self.rows[local * self.width..(local + 1) * self.width]);
        }
        ch.needed_col.store(i, Ordering::Relaxed);
        ch.state.store(CH_NEEDED, Ordering::Release);

        let mut spins = 0u32;
        loop {
            match ch.state.load(Ordering::Acquire) {
                CH_OFFERED => {
                    {
                        let payload = ch.payload.lock().unwrap();
                        self.rows[local * self.width..(local + 1) * self.width]
                            .copy_from_slice(&payload);
                    }
                    ch.state.store(CH_IDLE, Ordering::Release);
                    self.counters.record_swap();
                    self.swaps += 1;
                    debug_assert!(self.cell(local, i).abs() > self.eps);
                    return Ok(());
                }
                CH_NEEDED => {
                    if self.shared.abort_requested() {
                        let _ = ch.state.compare_exchange(
                            CH_NEEDED,
                            CH_IDLE,
                            Ordering::AcqRel,
                            Ordering::Acquire,
                        );
                        return Err(secondary_abort());
                    }
                    let mut all_decided = true;
                    let mut any_candidate = false;
                    for k in self.de..self.n {
                        if self.shared.progress[k].load(Ordering::Acquire) < i {
                            all_decided = false;
                        } else if self.shared.candidate_for[k].load(Ordering::Relaxed) == i {
                            any_candidate = true;
                            break;
                        }
                    }
                    if !any_candidate && all_decided {
                        // Nothing usable exists at or below row i. Withdraw
                        // the request — unless a donor claimed it in the
                        // meantime, in which case take the offer instead.
                        match ch.state.compare_exchange(
                            CH_NEEDED,
                            CH_IDLE,
                            Ordering::AcqRel,
                            Ordering::Acquire,
                        ) {
                            Ok(_) => return Err(Error::Singular { pivot: i }),
                            Err(_) => continue,
                        }
                    }
                    spins += 1;
                    if spins < SPIN_LIMIT {
                        std::hint::spin_loop();
                    } else {
                        std::thread::yield_now();
                    }
                }
                CH_CLAIMED => {
                    // Donor is mid-exchange; the offer is imminent.
                    std::hint::spin_loop();
                }
                state => unreachable!("requester saw unexpected channel state {state}"),
            }
        }
    }
}

// ======================================================================
// Orchestration
// ======================================================================

pub(crate) struct ParallelRun {
    pub swaps: usize,
    pub counters: OpCounter,
    pub stats: ParallelStats,
}

/// Runs pivots `first_pivot .. n` over `threads` row blocks, in place.
/// `first_pivot > 0` is the finishing mode after a partial reduction: the
/// leading columns are already unit basis columns and are left alone, but
/// every row still participates in the remaining sweeps.
pub(crate) fn solve_blocks_from(
    work: &mut AugmentedMatrix,
    first_pivot: usize,
    threads: usize,
    eps: f64,
) -> Result<ParallelRun> {
    let n = work.n();
    let plan = make_partition(n, threads)?;
    if first_pivot >= n {
        return Ok(ParallelRun {
            swaps: 0,
            counters: OpCounter::new(),
            stats: ParallelStats {
                workers: Vec::new(),
                pivot_elements_stored: 0,
            },
        });
    }
    let width = work.width();
    let shared = Shared::new(n, first_pivot);

    // Sequential prologue: secure, normalize, and publish the first pivot
    // so every worker has something to consume the moment it starts. The
    // swap search spans all rows below — blocks don't exist yet.
    let mut counters = OpCounter::new();
    let mut swaps = 0;
    if work.get(first_pivot, first_pivot).abs() <= eps {
        let j = find_swap_row(work, first_pivot, n, eps).ok_or(Error::Singular {
            pivot: first_pivot,
        })?;
        work.swap_rows(first_pivot, j);
        counters.record_swap();
        swaps += 1;
    }
    {
        let row = work.row_mut(first_pivot);
        if normalize_tail(row, first_pivot) {
            counters.record_row_update(width - first_pivot);
        }
        shared.pivots.publish_row(first_pivot, &row[first_pivot + 1..]);
    }

    // Carve the matrix into per-worker blocks and run the three phases.
    let mut worker_stats: Vec<Option<WorkerStats>> = Vec::with_capacity(threads);
    {
        let mut blocks = Vec::with_capacity(threads);
        let mut rest = work.data_mut();
        for range in plan.blocks() {
            let (head, tail) = rest.split_at_mut(range.len() * width);
            blocks.push(head);
            rest = tail;
        }

        let shared_ref = &shared;
        let results = std::thread::scope(|scope| {
            let handles: Vec<_> = blocks
                .into_iter()
                .enumerate()
                .map(|(rank, rows)| {
                    let range = plan.block(rank);
                    scope.spawn(move || {
                        let worker = Worker {
                            rank,
                            ds: range.start,
                            de: range.end,
                            first_pivot,
                            n,
                            width,
                            eps,
                            rows,
                            shared: shared_ref,
                            tail_buf: Vec::with_capacity(n),
                            counters: OpCounter::new(),
                            swaps: 0,
                        };
                        let outcome = catch_unwind(AssertUnwindSafe(|| worker.run()))
                            .unwrap_or_else(|panic| {
                                Err(Error::Aborted {
                                    reason: format!(
                                        "worker {rank} panicked: {}",
                                        panic_message(&panic)
                                    ),
                                })
                            });
                        match outcome {
                            Ok(stats) => Some(stats),
                            Err(e) => {
                                shared_ref.abort_with(e);
                                None
                            }
                        }
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or(None))
                .collect::<Vec<_>>()
        });
        worker_stats.extend(results);
    }

    if let Some(e) = shared.error.lock().unwrap().take() {
        return Err(e);
    }
    let mut workers = Vec::with_capacity(threads);
    for stats in worker_stats {
        let stats = stats.ok_or_else(|| Error::Aborted {
            reason: "worker finished without stats or error".into(),
        })?;
        counters.merge(&stats.counters);
        swaps += stats.swaps;
        workers.push(stats);
    }
    Ok(ParallelRun {
        swaps,
        counters,
        stats: ParallelStats {
            workers,
            pivot_elements_stored: shared.pivots.stored_elements(),
        },
    })
}

fn panic_message(panic: &(dyn std::any::Any + Send)) -> String {
    if let Some(s) = panic.downcast_ref::<&str>() {
        (*s).to_string()
    } else if let Some(s) = panic.downcast_ref::<String>() {
        s.clone()
    } else {
        "unknown panic".into()
    }
}

/// Full parallel solve across `threads` workers; the input is untouched.
pub fn gauss_jordan_parallel(a: &AugmentedMatrix, threads: usize, eps: f64) -> Result<SolveOutcome> {
    gauss_jordan_parallel_with_stats(a, threads, eps).map(|(outcome, _)| outcome)
}

/// As [`gauss_jordan_parallel`], additionally returning per-worker phase
/// timings, op counts, and pivot-storage accounting.
pub fn gauss_jordan_parallel_with_stats(
    a: &AugmentedMatrix,
    threads: usize,
    eps: f64,
) -> Result<(SolveOutcome, ParallelStats)> {
    let mut work = a.clone();
    let run = solve_blocks_from(&mut work, 0, threads, eps)?;
    let outcome = SolveOutcome {
        solution: Solution::new(work.free_terms())?,
        swaps_performed: run.swaps,
        counters: run.counters,
    };
    Ok((outcome, run.stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::default_eps;
    use crate::oracle::{oracle_solve, residual_inf};
    use crate::pivot::pivot_capacity;
    use crate::serial::gauss_jordan_serial;

    fn fig_injected_at_crest() -> AugmentedMatrix {
        AugmentedMatrix::from_rows(&[
            vec![1.0, -1.0, -1.0, 0.0],
            vec![600.0, 900.0, 0.0, 12.0],
            vec![0.0, -900.0, 1800.0, 0.0],
        ])
        .unwrap()
    }

    /// Deterministic diagonally dominant dense system — no swaps, no skips.
    fn dominant(n: usize, salt: u64) -> AugmentedMatrix {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..=n)
                    .map(|j| {
                        let h = (i as u64)
                            .wrapping_mul(6364136223846793005)
                            .wrapping_add(j as u64)
                            .wrapping_mul(1442695040888963407)
                            .wrapping_add(salt);
                        let v = ((h >> 33) % 2001) as f64 / 100.0 - 10.0;
                        if i == j {
                            v + 10.0 * n as f64
                        } else {
                            v
                        }
                    })
                    .collect()
            })
            .collect();
        AugmentedMatrix::from_rows(&rows).unwrap()
    }

    fn assert_bit_identical(a: &[f64], b: &[f64]) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert_eq!(x.to_bits(), y.to_bits(), "{x} vs {y}");
        }
    }

    #[test]
    fn partition_splits_evenly_and_spreads_remainder_low() {
        let p = make_partition(8, 4).unwrap();
        let blocks: Vec<_> = p.blocks().collect();
        assert_eq!(blocks, vec![0..2, 2..4, 4..6, 6..8]);

        let p = make_partition(10, 4).unwrap();
        let sizes: Vec<usize> = p.blocks().map(|b| b.len()).collect();
        assert_eq!(sizes, vec![3, 3, 2, 2]);

        let p = make_partition(5, 1).unwrap();
        assert_eq!(p.block(0), 0..5);
    }

    #[test]
    fn partition_rejects_bad_worker_counts() {
        assert!(matches!(
            make_partition(3, 4),
            Err(Error::BadWorkerCount { threads: 4, n: 3 })
        ));
        assert!(matches!(
            make_partition(3, 0),
            Err(Error::BadWorkerCount { threads: 0, .. })
        ));
    }

    #[test]
    fn single_worker_matches_serial_bit_for_bit() {
        for a in [fig_injected_at_crest(), dominant(17, 3)] {
            let eps = default_eps(&a);
            let serial = gauss_jordan_serial(&a, eps).unwrap();
            let parallel = gauss_jordan_parallel(&a, 1, eps).unwrap();
            assert_bit_identical(serial.solution.as_slice(), parallel.solution.as_slice());
            assert_eq!(serial.swaps_performed, parallel.swaps_performed);
            assert_eq!(serial.counters, parallel.counters);
        }
    }

    #[test]
    fn single_worker_matches_serial_even_with_swaps() {
        // Zero leading pivot forces the prologue swap; same smallest-index
        // rule as the serial kernel, so the run stays bit-identical.
        let a = AugmentedMatrix::from_rows(&[
            vec![0.0, 2.0, 1.0, 3.0],
            vec![4.0, 1.0, 0.0, 5.0],
            vec![2.0, 0.0, 3.0, 1.0],
        ])
        .unwrap();
        let eps = default_eps(&a);
        let serial = gauss_jordan_serial(&a, eps).unwrap();
        let parallel = gauss_jordan_parallel(&a, 1, eps).unwrap();
        assert!(serial.swaps_performed > 0);
        assert_eq!(serial.swaps_performed, parallel.swaps_performed);
        assert_bit_identical(serial.solution.as_slice(), parallel.solution.as_slice());
    }

    #[test]
    fn multi_worker_solves_the_circuit_example() {
        let a = fig_injected_at_crest();
        let eps = default_eps(&a);
        let want = [0.01, 1.0 / 150.0, 1.0 / 300.0];
        for threads in [1, 2, 3] {
            let out = gauss_jordan_parallel(&a, threads, eps).unwrap();
            for (g, w) in out.solution.as_slice().iter().zip(&want) {
                assert!((g - w).abs() < 1e-12, "threads={threads}: {g} vs {w}");
            }
        }
    }

    #[test]
    fn no_swap_solves_are_bit_identical_to_serial_at_any_width() {
        for (n, salt) in [(16usize, 1u64), (33, 2), (64, 3)] {
            let a = dominant(n, salt);
            let eps = default_eps(&a);
            let serial = gauss_jordan_serial(&a, eps).unwrap();
            assert_eq!(serial.swaps_performed, 0);
            for threads in [2, 3, 8] {
                let parallel = gauss_jordan_parallel(&a, threads, eps).unwrap();
                assert_eq!(parallel.swaps_performed, 0);
                assert_bit_identical(serial.solution.as_slice(), parallel.solution.as_slice());
            }
        }
    }

    #[test]
    fn local_swap_secures_pivot_inside_the_block() {
        // Blocks of two rows; a[2][2] dies after elimination but row 3 in
        // the same block can stand in.
        let a = AugmentedMatrix::from_rows(&[
            vec![2.0, 1.0, 1.0, 0.0, 8.0],
            vec![0.0, 3.0, 0.0, 1.0, 6.0],
            vec![0.0, 0.0, 0.0, 2.0, 4.0],
            vec![0.0, 0.0, 5.0, 1.0, 10.0],
        ])
        .unwrap();
        let eps = default_eps(&a);
        let out = gauss_jordan_parallel(&a, 2, eps).unwrap();
        assert_eq!(out.swaps_performed, 1);
        assert!(residual_inf(&a, out.solution.as_slice()) < 1e-12);
        let want = oracle_solve(&a).unwrap();
        for (g, w) in out.solution.as_slice().iter().zip(want.as_slice()) {
            assert!((g - w).abs() < 1e-9);
        }
    }

    #[test]
    fn cross_block_exchange_borrows_a_row_from_a_higher_block() {
        // Block 0 owns rows 0..2, block 1 rows 2..4. Column 1 is zero
        // throughout block 0 below the pivot, so the content swap with a
        // flagged row in block 1 is the only way forward.
        let a = AugmentedMatrix::from_rows(&[
            vec![1.0, 0.0, 2.0, 1.0, 7.0],
            vec![0.0, 0.0, 4.0, 1.0, 9.0],
            vec![0.0, 7.0, 1.0, 0.0, 15.0],
            vec![0.0, 1.0, 0.0, 3.0, 10.0],
        ])
        .unwrap();
        let eps = default_eps(&a);
        let out = gauss_jordan_parallel(&a, 2, eps).unwrap();
        assert_eq!(out.swaps_performed, 1);
        let want = oracle_solve(&a).unwrap();
        for (g, w) in out.solution.as_slice().iter().zip(want.as_slice()) {
            assert!((g - w).abs() < 1e-9, "{g} vs {w}");
        }
    }

    #[test]
    fn singular_column_errors_instead_of_hanging() {
        // Column 1 is zero in every row at or below the diagonal.
        let a = AugmentedMatrix::from_rows(&[
            vec![1.0, 5.0, 2.0, 3.0],
            vec![0.0, 0.0, 1.0, 4.0],
            vec![0.0, 0.0, 3.0, 5.0],
        ])
        .unwrap();
        for threads in [1, 2, 3] {
            match gauss_jordan_parallel(&a, threads, 1e-12) {
                Err(Error::Singular { pivot }) => assert_eq!(pivot, 1, "threads={threads}"),
                other => panic!("threads={threads}: expected singular, got {other:?}"),
            }
        }
    }

    #[test]
    fn prologue_singularity_is_reported_before_any_worker_runs() {
        let a = AugmentedMatrix::from_rows(&[
            vec![0.0, 1.0, 1.0],
            vec![0.0, 2.0, 2.0],
        ])
        .unwrap();
        assert!(matches!(
            gauss_jordan_parallel(&a, 2, 1e-12),
            Err(Error::Singular { pivot: 0 })
        ));
    }

    #[test]
    fn order_one_system_solves_with_one_worker() {
        let a = AugmentedMatrix::from_rows(&[vec![4.0, 10.0]]).unwrap();
        let out = gauss_jordan_parallel(&a, 1, 1e-12).unwrap();
        assert!((out.solution.get(0) - 2.5).abs() < 1e-15);
    }

    #[test]
    fn worker_op_counts_stay_balanced_on_dense_inputs() {
        let a = dominant(256, 9);
        let eps = default_eps(&a);
        for threads in [2, 4, 8] {
            let (_, stats) = gauss_jordan_parallel_with_stats(&a, threads, eps).unwrap();
            let counts: Vec<u64> = stats
                .workers
                .iter()
                .map(|w| w.counters.element_updates())
                .collect();
            let max = *counts.iter().max().unwrap() as f64;
            let min = *counts.iter().min().unwrap() as f64;
            assert!(
                max / min <= 1.1,
                "threads={threads}: imbalance {counts:?}"
            );
        }
    }

    #[test]
    fn pivot_storage_matches_capacity_after_a_full_solve() {
        for (n, threads) in [(8usize, 3usize), (33, 4)] {
            let a = dominant(n, 11);
            let (_, stats) =
                gauss_jordan_parallel_with_stats(&a, threads, default_eps(&a)).unwrap();
            assert_eq!(stats.pivot_elements_stored, pivot_capacity(n));
        }
    }

    #[test]
    fn merged_counters_equal_serial_counters_when_nothing_skips() {
        let a = dominant(48, 5);
        let eps = default_eps(&a);
        let serial = gauss_jordan_serial(&a, eps).unwrap();
        for threads in [2, 5] {
            let parallel = gauss_jordan_parallel(&a, threads, eps).unwrap();
            assert_eq!(parallel.counters, serial.counters, "threads={threads}");
        }
    }
}
