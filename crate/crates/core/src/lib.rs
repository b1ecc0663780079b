//! Solvers for dense linear systems whose coefficients drift over time —
//! the shape of circuit simulation, where a handful of component values
//! (a varying resistance, a driving source) change every step while the
//! rest of the network stays fixed.
//!
//! The toolkit, bottom to top:
//!
//! * [`AugmentedMatrix`] / [`TimeVaryingSystem`] — an `n x (n+1)` augmented
//!   grid, optionally split into a constant base plus sparse time-dependent
//!   entries that are re-[injected](TimeVaryingSystem::inject) per instant.
//! * [`gauss_jordan_serial`] — Gauss-Jordan elimination to reduced row
//!   echelon form over a shrinking active window, with exact skip rules for
//!   unit pivots and zero multipliers and an [`OpCounter`] tally of applied
//!   work.
//! * [`gauss_jordan_parallel`] — the same elimination over contiguous row
//!   blocks on `std` threads: finished pivot rows are published through a
//!   lock-free triangular store, and defective pivots are repaired by a
//!   cross-block row exchange instead of a global barrier. One thread
//!   reproduces the serial result bit for bit; so does any thread count on
//!   swap-free systems.
//! * [`reduce`] / [`finish_solve`] — partial pre-reduction: run the first β
//!   columns once (all of them constant by [`compute_boundary`]'s choice of
//!   β), then finish only columns `β..n` per time step.
//!   [`symbolic_reduce_check`] independently audits that every operation of
//!   such a reduction is safe.
//! * [`simulate`] — time sweeps under any [`SolverMode`], plus
//!   [`generators`](crate::generators) for reproducible dense and
//!   circuit-shaped inputs and [`textio`](crate::textio) for a plain-text
//!   interchange format.

pub mod error;
pub mod generators;
pub mod matrix;
pub mod oracle;
pub mod parallel;
pub mod pivot;
pub mod reduction;
pub mod serial;
pub mod simulation;
pub mod symbolic;
pub mod system;
pub mod textio;

pub use error::{Error, Result};
pub use generators::{generate, Family, GenSpec};
pub use matrix::{default_eps, AugmentedMatrix, OpCounter, Solution};
pub use oracle::{oracle_solve, residual_inf};
pub use parallel::{
    gauss_jordan_parallel, gauss_jordan_parallel_with_stats, make_partition, ParallelStats,
    PartitionPlan, WorkerStats,
};
pub use pivot::{pivot_capacity, PivotMatrix};
pub use reduction::{
    compute_boundary, finish_solve, gauss_jordan_partial, reduce, Kernel, ReductionResult,
};
pub use serial::{find_swap_row, gauss_jordan_serial, iterate, SolveOutcome};
pub use simulation::{
    example_circuit, simulate, solve_with_kernel, ReductionSummary, SimulationConfig, SolverMode,
    TimeSeries,
};
pub use symbolic::{symbolic_reduce_check, ReduceCheck, SymbolicEntry, Violation};
pub use system::{TimeFunction, TimeVaryingSystem, UnknownLabel, VariableEntry};
pub use textio::{read_system, read_system_with_beta, write_reduction, write_system};
