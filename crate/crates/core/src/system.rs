//! Time-varying systems: a constant base matrix plus sparse time-dependent
//! entries.
//!
//! Each matrix cell decomposes as `a(t) = c + v(t)`: the constant part `c`
//! lives in the base [`AugmentedMatrix`], and the optional varying part
//! `v(t)` is a [`VariableEntry`] stored separately. Solvers never see the
//! decomposition — [`TimeVaryingSystem::inject`] evaluates every variable at
//! an instant and returns an ordinary matrix. Keeping the base pristine is
//! what makes partial pre-reduction sound: the reduced base can be reused
//! across every time step while only the injected values change.

use crate::error::{Error, Result};
use crate::matrix::AugmentedMatrix;

/// Scalar function of time for one varying entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeFunction {
    Constant { value: f64 },
    /// `v(t) = offset + amplitude * sin(2*pi*frequency*t + phase)`.
    Sinusoid {
        offset: f64,
        amplitude: f64,
        frequency: f64,
        phase: f64,
    },
}

impl TimeFunction {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            TimeFunction::Constant { value } => value,
            TimeFunction::Sinusoid {
                offset,
                amplitude,
                frequency,
                phase,
            } => offset + amplitude * (2.0 * std::f64::consts::PI * frequency * t + phase).sin(),
        }
    }
}

/// One time-varying cell: position in the augmented grid plus its `v(t)`.
/// `col` may be `n` — free terms (driving sources) can vary too.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariableEntry {
    pub row: usize,
    pub col: usize,
    pub func: TimeFunction,
}

/// Optional semantic tag for an unknown; metadata only, never consulted by
/// the solvers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnknownLabel {
    /// Branch current.
    Current,
    /// Electromotive force.
    Emf,
}

/// A base matrix plus its variable entries (and optional unknown labels).
#[derive(Debug, Clone, PartialEq)]
pub struct TimeVaryingSystem {
    base: AugmentedMatrix,
    vars: Vec<VariableEntry>,
    labels: Option<Vec<UnknownLabel>>,
}

impl TimeVaryingSystem {
    /// Validates that every variable lies inside the grid and that no two
    /// variables share a position (one `v(t)` per cell).
    pub fn new(base: AugmentedMatrix, vars: Vec<VariableEntry>) -> Result<Self> {
        let n = base.n();
        for v in &vars {
            if v.row >= n || v.col > n {
                return Err(Error::VariableOutOfRange {
                    row: v.row,
                    col: v.col,
                    n,
                });
            }
        }
        let mut positions: Vec<(usize, usize)> = vars.iter().map(|v| (v.row, v.col)).collect();
        positions.sort_unstable();
        for pair in positions.windows(2) {
            if pair[0] == pair[1] {
                return Err(Error::DuplicateVariable {
                    row: pair[0].0,
                    col: pair[0].1,
                });
            }
        }
        Ok(Self {
            base,
            vars,
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<UnknownLabel>) -> Self {
        self.labels = Some(labels);
        self
    }

    pub fn base(&self) -> &AugmentedMatrix {
        &self.base
    }

    pub fn vars(&self) -> &[VariableEntry] {
        &self.vars
    }

    pub fn labels(&self) -> Option<&[UnknownLabel]> {
        self.labels.as_deref()
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    /// Materializes the system at time `t`: a copy of the base with each
    /// variable's value *added* to its cell (`a = c + v(t)`). Pure — the
    /// system itself is untouched, and equal `t` gives equal output.
    pub fn inject(&self, t: f64) -> Result<AugmentedMatrix> {
        Self::inject_into(&self.base, &self.vars, t)
    }

    /// Same as [`inject`](Self::inject) but against a caller-supplied base —
    /// the finishing solve injects into the *reduced* base, not the original.
    pub(crate) fn inject_into(
        base: &AugmentedMatrix,
        vars: &[VariableEntry],
        t: f64,
    ) -> Result<AugmentedMatrix> {
        let mut out = base.clone();
        for v in vars {
            let sample = v.func.eval(t);
            if !sample.is_finite() {
                return Err(Error::NonFiniteSample {
                    row: v.row,
                    col: v.col,
                    t,
                    value: sample,
                });
            }
            out.set(v.row, v.col, out.get(v.row, v.col) + sample);
        }
        Ok(out)
    }
}
