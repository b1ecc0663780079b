//! Benchmark harness behind the `gjsim bench` subcommand.
//!
//! The measured quantity is one *per-step solve*: inject the time-varying
//! entries into the (possibly pre-reduced) base and finish the remaining
//! columns with the configured kernel. Everything else — generating the
//! input, the one-time reduction, statistics, report I/O — happens outside
//! the timed region, which is enforced by structure: [`prepare_cell`] never
//! sees a clock, and [`time_prepared_cell`] calls the clock exactly twice
//! per repetition (warmups included). Tests inject a scripted [`Clock`] to
//! pin both properties.
//!
//! A reduction fraction of 0 places the boundary at column 0, so the timed
//! work *is* the full solve — the baseline cells and the reduced cells are
//! the same code path with different boundaries. Samples pass through Tukey
//! outlier fences before summary statistics, and each cell carries the
//! speedup against its own single-thread baseline when that cell is
//! available.

use std::time::Instant;

use serde::Serialize;

use gjsim_core::{
    default_eps, finish_solve, generate, reduce, Error, Family, GenSpec, Kernel,
    ReductionResult, Result,
};

// ======================================================================
// Clock
// ======================================================================

/// Nanosecond time source. `&mut self` so test doubles can count calls.
pub trait Clock {
    fn now_ns(&mut self) -> u64;
}

/// Monotonic wall clock anchored at its construction instant.
pub struct MonotonicClock {
    origin: Instant,
}

impl MonotonicClock {
    pub fn new() -> Self {
        Self {
            origin: Instant::now(),
        }
    }
}

impl Default for MonotonicClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for MonotonicClock {
    fn now_ns(&mut self) -> u64 {
        self.origin.elapsed().as_nanos() as u64
    }
}

// ======================================================================
// Configuration and report shape
// ======================================================================

/// Grid of benchmark cells plus repetition counts.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub families: Vec<Family>,
    pub sizes: Vec<usize>,
    pub threads: Vec<usize>,
    pub fractions: Vec<f64>,
    pub reps: usize,
    pub warmup: usize,
    pub seed: u64,
}

impl Default for BenchConfig {
    /// The preset grid: both families over sizes {128, 512, 1024, 2040},
    /// thread counts {1, 2, 4, 8}, and boundary fractions {0, 0.19, 0.5},
    /// 200 repetitions after 10 warmups.
    fn default() -> Self {
        Self {
            families: vec![Family::RandomDense, Family::CircuitSparse],
            sizes: vec![128, 512, 1024, 2040],
            threads: vec![1, 2, 4, 8],
            fractions: vec![0.0, 0.19, 0.5],
            reps: 200,
            warmup: 10,
            seed: 2024,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        let complain = |reason: String| Err(Error::InvalidConfig { reason });
        if self.reps < 3 {
            return complain(format!(
                "outlier removal needs quartiles: reps must be >= 3, got {}",
                self.reps
            ));
        }
        if self.families.is_empty() || self.sizes.is_empty() || self.threads.is_empty()
            || self.fractions.is_empty()
        {
            return complain("families, sizes, threads, and fractions must be non-empty".into());
        }
        if let Some(t) = self.threads.iter().find(|&&t| t == 0) {
            return complain(format!("thread counts must be >= 1, got {t}"));
        }
        if let Some(n) = self.sizes.iter().find(|&&n| n == 0) {
            return complain(format!("sizes must be >= 1, got {n}"));
        }
        if let Some(f) = self
            .fractions
            .iter()
            .find(|f| !f.is_finite() || !(0.0..=1.0).contains(*f))
        {
            return complain(format!("reduction fractions must lie in [0, 1], got {f}"));
        }
        Ok(())
    }
}

/// One report line. Numeric fields are `None` when the cell failed, in
/// which case `error` says why; `speedup_vs_1t` is additionally `None`
/// when the matching single-thread cell is unavailable.
#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub family: String,
    pub n: usize,
    pub threads: usize,
    pub reduction_fraction: f64,
    pub reps: usize,
    pub kept: Option<usize>,
    pub removed: Option<usize>,
    pub mean_ns: Option<f64>,
    pub median_ns: Option<f64>,
    pub stddev_ns: Option<f64>,
    pub min_ns: Option<u64>,
    pub max_ns: Option<u64>,
    pub speedup_vs_1t: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn all_ok(&self) -> bool {
        self.rows.iter().all(|r| r.error.is_none())
    }
}

/// The CSV schema, in column order. The `error` field is deliberately not
/// a CSV column — failed cells emit empty numeric fields and the message
/// goes to the JSON report or the runner's diagnostics.
pub const CSV_HEADER: &str = "family,n,threads,reduction_fraction,reps,kept,removed,mean_ns,\
median_ns,stddev_ns,min_ns,max_ns,speedup_vs_1t";

fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_csv(w: &mut impl std::io::Write, report: &BenchReport) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in &report.rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.family,
            r.n,
            r.threads,
            r.reduction_fraction,
            r.reps,
            opt(&r.kept),
            opt(&r.removed),
            opt(&r.mean_ns),
            opt(&r.median_ns),
            opt(&r.stddev_ns),
            opt(&r.min_ns),
            opt(&r.max_ns),
            opt(&r.speedup_vs_1t),
        )?;
    }
    Ok(())
}

// ======================================================================
// Statistics
// ======================================================================

/// Linear-interpolation quantile (the `(len-1)p` rule) over sorted samples.
fn quantile(sorted: &[u64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = h - lo as f64;
    sorted[lo] as f64 + frac * (sorted[hi] as f64 - sorted[lo] as f64)
}

/// Tukey fences: drops samples outside `[Q1 - 1.5*IQR, Q3 + 1.5*IQR]`,
/// preserving the original order of the survivors. Fewer than 3 samples
/// pass through unchanged (no meaningful quartiles).
pub fn remove_outliers(samples: &[u64]) -> Vec<u64> {
    if samples.len() < 3 {
        return samples.to_vec();
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable();
    let q1 = quantile(&sorted, 0.25);
    let q3 = quantile(&sorted, 0.75);
    let iqr = q3 - q1;
    let (lo, hi) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    samples
        .iter()
        .copied()
        .filter(|&v| (v as f64) >= lo && (v as f64) <= hi)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub median: f64,
    /// Sample standard deviation (n−1 denominator); 0 for a single sample.
    pub stddev: f64,
    pub min: u64,
    pub max: u64,
}

pub fn summarize(samples: &[u64]) -> Summary {
    assert!(!samples.is_empty(), "summarize needs at least one sample");
    let len = samples.len();
    let mean = samples.iter().map(|&v| v as f64).sum::<f64>() / len as f64;
    let mut sorted = samples.to_vec();
    sorted.sort_unstable();
    let median = quantile(&sorted, 0.5);
    let stddev = if len < 2 {
        0.0
    } else {
        let ss: f64 = samples.iter().map(|&v| (v as f64 - mean).powi(2)).sum();
        (ss / (len - 1) as f64).sqrt()
    };
    Summary {
        mean,
        median,
        stddev,
        min: sorted[0],
        max: sorted[len - 1],
    }
}

// ======================================================================
// Cells
// ======================================================================

/// Everything a timed repetition needs, prepared entirely outside the
/// timed region: the generated system, its one-time reduction, the kernel,
/// and the pivot tolerance. Note there is no clock anywhere near this.
pub struct PreparedCell {
    red: ReductionResult,
    kernel: Kernel,
    eps: f64,
}

/// Generates the cell's input and performs its one-time reduction. A
/// single-thread cell uses the serial kernel (not a one-worker parallel
/// run) so the baseline is the plain sequential algorithm.
pub fn prepare_cell(
    family: Family,
    n: usize,
    threads: usize,
    fraction: f64,
    seed: u64,
) -> Result<PreparedCell> {
    let sys = generate(&GenSpec {
        n,
        seed,
        family,
        reduction_fraction: fraction,
        extra_vars: 2,
    })?;
    let eps = default_eps(sys.base());
    let (red, _) = reduce(&sys, eps);
    if red.completed() != red.boundary() {
        return Err(Error::IncompleteReduction {
            completed: red.completed(),
            boundary: red.boundary(),
        });
    }
    let kernel = if threads == 1 {
        Kernel::Serial
    } else {
        Kernel::Parallel { threads }
    };
    Ok(PreparedCell { red, kernel, eps })
}

/// Times `warmup + reps` per-step solves at instants `0.00, 0.01, 0.02, …`
/// and returns the last `reps` samples in nanoseconds. Calls the clock
/// exactly `2 * (warmup + reps)` times — once immediately before and once
/// immediately after each solve, warmups included.
pub fn time_prepared_cell(
    cell: &PreparedCell,
    warmup: usize,
    reps: usize,
    clock: &mut impl Clock,
) -> Result<Vec<u64>> {
    let mut samples = Vec::with_capacity(reps);
    for rep in 0..warmup + reps {
        let t = rep as f64 * 0.01;
        let start = clock.now_ns();
        let outcome = finish_solve(&cell.red, t, cell.kernel, cell.eps)?;
        let stop = clock.now_ns();
        std::hint::black_box(&outcome);
        if rep >= warmup {
            samples.push(stop.saturating_sub(start));
        }
    }
    Ok(samples)
}

// ======================================================================
// Runner
// ======================================================================

/// Runs the whole grid, calling `on_row` as each row is finished (rows come
/// out in family → size → fraction → thread order). Cell failures become
/// rows with an `error` and empty statistics; only an invalid config makes
/// the run itself fail.
pub fn run_benchmark(
    cfg: &BenchConfig,
    clock: &mut impl Clock,
    mut on_row: impl FnMut(&BenchRow),
) -> Result<BenchReport> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for &family in &cfg.families {
        for &n in &cfg.sizes {
            for &fraction in &cfg.fractions {
                // Single-thread mean within this (family, n, fraction)
                // group, once available, anchors the speedup column.
                let mut base_mean: Option<f64> = None;
                for &threads in &cfg.threads {
                    let outcome = prepare_cell(family, n, threads, fraction, cfg.seed)
                        .and_then(|cell| time_prepared_cell(&cell, cfg.warmup, cfg.reps, clock));
                    let row = match outcome {
                        Ok(samples) => {
                            let kept = remove_outliers(&samples);
                            let s = summarize(&kept);
                            if threads == 1 {
                                base_mean = Some(s.mean);
                            }
                            BenchRow {
                                family: family.to_string(),
                                n,
                                threads,
                                reduction_fraction: fraction,
                                reps: cfg.reps,
                                kept: Some(kept.len()),
                                removed: Some(samples.len() - kept.len()),
                                mean_ns: Some(s.mean),
                                median_ns: Some(s.median),
                                stddev_ns: Some(s.stddev),
                                min_ns: Some(s.min),
                                max_ns: Some(s.max),
                                speedup_vs_1t: base_mean.map(|b| b / s.mean),
                                error: None,
                            }
                        }
                        Err(e) => BenchRow {
                            family: family.to_string(),
                            n,
                            threads,
                            reduction_fraction: fraction,
                            reps: cfg.reps,
                            kept: None,
                            removed: None,
                            mean_ns: None,
                            median_ns: None,
                            stddev_ns: None,
                            min_ns: None,
                            max_ns: None,
                            speedup_vs_1t: None,
                            error: Some(e.to_string()),
                        },
                    };
                    on_row(&row);
                    rows.push(row);
                }
            }
        }
    }
    Ok(BenchReport { rows })
}
