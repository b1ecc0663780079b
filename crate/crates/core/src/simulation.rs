//! Time-stepped simulation: solve the same time-varying system at a sweep of
//! instants.
//!
//! Two strategies produce the same states (up to rounding in the finishing
//! arithmetic): [`SolverMode::Full`] injects and solves the whole system at
//! every step, while [`SolverMode::Reduced`] pre-reduces the constant prefix
//! once and only finishes the remaining columns per step. The recorded
//! per-step op counters make the saving measurable: with boundary β and
//! `r = n - β` columns left, a dense finishing step costs `n * r * (r + 3) / 2`
//! element updates against `n * n * (n + 3) / 2` for a full solve.

use crate::error::{Error, Result};
use crate::matrix::{default_eps, AugmentedMatrix, OpCounter, Solution};
use crate::parallel::gauss_jordan_parallel;
use crate::reduction::{finish_solve, reduce, Kernel};
use crate::serial::{gauss_jordan_serial, SolveOutcome};
use crate::system::{TimeFunction, TimeVaryingSystem, UnknownLabel, VariableEntry};

/// Strategy for producing the state at each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMode {
    /// Inject at `t` and run the chosen kernel over all `n` columns.
    Full(Kernel),
    /// Reduce the base once, then inject and finish from the boundary.
    Reduced(Kernel),
}

/// Sweep parameters. Step `i` is evaluated at `t0 + i * dt` (computed from
/// the step index each time, not accumulated, so long sweeps don't drift).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationConfig {
    pub t0: f64,
    pub dt: f64,
    pub steps: usize,
    pub mode: SolverMode,
    /// Pivot tolerance; `None` derives it from the base matrix norm.
    pub eps: Option<f64>,
}

impl SimulationConfig {
    fn validate(&self) -> Result<()> {
        if !self.t0.is_finite() {
            return Err(Error::InvalidConfig {
                reason: format!("start time must be finite, got {}", self.t0),
            });
        }
        if !self.dt.is_finite() || self.dt <= 0.0 {
            return Err(Error::InvalidConfig {
                reason: format!("time step must be finite and positive, got {}", self.dt),
            });
        }
        if self.steps == 0 {
            return Err(Error::InvalidConfig {
                reason: "step count must be at least 1".to_string(),
            });
        }
        if let Some(eps) = self.eps {
            if !eps.is_finite() || eps < 0.0 {
                return Err(Error::InvalidConfig {
                    reason: format!("tolerance must be finite and non-negative, got {eps}"),
                });
            }
        }
        Ok(())
    }
}

/// One-time reduction work done before a [`SolverMode::Reduced`] sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionSummary {
    /// Boundary the reduction aimed for.
    pub boundary: usize,
    /// Iterations actually completed (smaller only if the constant prefix
    /// hit a singular pivot; the sweep then finishes from here instead).
    pub completed: usize,
    /// Cost of the one-time reduction.
    pub counters: OpCounter,
}

/// A completed sweep: per-step instants, states, and op counts, plus the
/// one-time reduction cost when the reduced strategy was used.
#[derive(Debug, Clone)]
pub struct TimeSeries {
    times: Vec<f64>,
    states: Vec<Solution>,
    step_counters: Vec<OpCounter>,
    reduction: Option<ReductionSummary>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[Solution] {
        &self.states
    }

    pub fn step_counters(&self) -> &[OpCounter] {
        &self.step_counters
    }

    pub fn reduction(&self) -> Option<&ReductionSummary> {
        self.reduction.as_ref()
    }

    /// Sum of per-step element updates (excludes the one-time reduction).
    pub fn total_step_updates(&self) -> u64 {
        self.step_counters.iter().map(OpCounter::element_updates).sum()
    }
}

/// Runs one solve of a plain matrix with the chosen kernel.
pub fn solve_with_kernel(a: &AugmentedMatrix, kernel: Kernel, eps: f64) -> Result<SolveOutcome> {
    match kernel {
        Kernel::Serial => gauss_jordan_serial(a, eps),
        Kernel::Parallel { threads } => gauss_jordan_parallel(a, threads, eps),
    }
}

/// Sweeps the system over `config.steps` instants. A failure at any step
/// (singular instance, worker count out of range, non-finite sample) aborts
/// the sweep with the step index and instant attached.
pub fn simulate(sys: &TimeVaryingSystem, config: &SimulationConfig) -> Result<TimeSeries> {
    config.validate()?;
    let eps = config.eps.unwrap_or_else(|| default_eps(sys.base()));
    let mut times = Vec::with_capacity(config.steps);
    let mut states = Vec::with_capacity(config.steps);
    let mut step_counters = Vec::with_capacity(config.steps);

    let at_step = |step: usize| config.t0 + step as f64 * config.dt;
    let step_failed = |step: usize, source: Error| Error::StepFailed {
        step,
        t: at_step(step),
        source: Box::new(source),
    };

    let mut reduction = None;
    let mut step_once: Box<dyn FnMut(f64) -> Result<SolveOutcome>> = match config.mode {
        SolverMode::Full(kernel) => Box::new(move |t| {
            let instance = sys.inject(t)?;
            solve_with_kernel(&instance, kernel, eps)
        }),
        SolverMode::Reduced(kernel) => {
            let (red, counters) = reduce(sys, eps);
            reduction = Some(ReductionSummary {
                boundary: red.boundary(),
                completed: red.completed(),
                counters,
            });
            // A short reduction is still a valid (smaller) head start.
            let red = red.clamped_to_completed();
            Box::new(move |t| finish_solve(&red, t, kernel, eps))
        }
    };

    for step in 0..config.steps {
        let t = at_step(step);
        let outcome = step_once(t).map_err(|e| step_failed(step, e))?;
        times.push(t);
        states.push(outcome.solution);
        step_counters.push(outcome.counters);
    }

    Ok(TimeSeries {
        times,
        states,
        step_counters,
        reduction,
    })
}

/// The worked three-branch circuit: two resistive branches fed by a constant
/// source, with one branch's resistance swinging sinusoidally between 0 and
/// 1800 ohms (900 ohms at `t = 0`, 1800 at the crest `t = 0.5`). Unknowns
/// are the three branch currents. Used across tests and as a CLI demo.
pub fn example_circuit() -> TimeVaryingSystem {
    let base = AugmentedMatrix::from_rows(&[
        vec![1.0, -1.0, -1.0, 0.0],
        vec![600.0, 900.0, 0.0, 12.0],
        vec![0.0, -900.0, 0.0, 0.0],
    ])
    .expect("static example rows are well-formed");
    let vars = vec![VariableEntry {
        row: 2,
        col: 2,
        func: TimeFunction::Sinusoid {
            offset: 900.0,
            amplitude: 900.0,
            frequency: 0.5,
            phase: 0.0,
        },
    }];
    TimeVaryingSystem::new(base, vars)
        .expect("static example variable is in range")
        .with_labels(vec![
            UnknownLabel::Current,
            UnknownLabel::Current,
            UnknownLabel::Current,
        ])
}
