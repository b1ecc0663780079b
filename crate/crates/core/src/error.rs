//! Error types shared across the crate.
//!
//! Every fallible public operation returns [`Error`]; callers can match on
//! the variant to distinguish input validation problems (bad dimensions,
//! non-finite data) from numerical failures (singularity) and from runtime
//! failures of the parallel machinery (worker panic, abort).

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Systems of order zero have no meaning here.
    #[error("matrix must have at least one row")]
    EmptyMatrix,

    /// A row of an augmented matrix must hold exactly n + 1 entries.
    #[error("row {row} has {got} entries, expected {expected}")]
    RowLength {
        row: usize,
        got: usize,
        expected: usize,
    },

    /// NaN or infinity found while constructing or updating a matrix.
    #[error("non-finite entry {value} at ({row}, {col})")]
    NonFinite { row: usize, col: usize, value: f64 },

    /// A variable entry points outside the n x (n+1) grid.
    #[error("variable entry at ({row}, {col}) out of range for order {n}")]
    VariableOutOfRange { row: usize, col: usize, n: usize },

    /// Two variable entries share one position; the decomposition a = c + v
    /// admits at most one time-varying term per cell.
    #[error("duplicate variable entry at ({row}, {col})")]
    DuplicateVariable { row: usize, col: usize },

    /// A time function produced NaN or infinity at the requested instant.
    #[error("variable at ({row}, {col}) evaluated to non-finite {value} at t = {t}")]
    NonFiniteSample {
        row: usize,
        col: usize,
        t: f64,
        value: f64,
    },

    /// No usable pivot exists for the given column: every eligible row has
    /// magnitude within tolerance of zero there.
    #[error("matrix is singular within tolerance at pivot column {pivot}")]
    Singular { pivot: usize },

    /// Worker count must satisfy 1 <= p <= n.
    #[error("worker count {threads} out of range for order {n}")]
    BadWorkerCount { threads: usize, n: usize },

    /// A parallel solve stopped early: a worker panicked or another worker
    /// reported an error first.
    #[error("parallel solve aborted: {reason}")]
    Aborted { reason: String },

    /// A finishing solve was asked to start from a reduction that stopped
    /// before reaching its boundary.
    #[error("reduction incomplete: {completed} of {boundary} iterations done")]
    IncompleteReduction { completed: usize, boundary: usize },

    /// Simulation configuration failed validation (dt, steps, threads).
    #[error("invalid configuration: {reason}")]
    InvalidConfig { reason: String },

    /// A simulation step failed; carries the step index and time so the
    /// caller can report where the sweep died.
    #[error("step {step} at t = {t} failed: {source}")]
    StepFailed {
        step: usize,
        t: f64,
        #[source]
        source: Box<Error>,
    },

    /// The generator kept producing (near-)singular systems and gave up.
    #[error("no nonsingular system generated after {attempts} attempts")]
    GenerationFailed { attempts: usize },

    /// Text-format parse failure, with the 1-based line number.
    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
