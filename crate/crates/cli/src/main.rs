//! `gjsim` — solve, pre-reduce, simulate, generate, and benchmark linear
//! systems with time-varying entries.
//!
//! File-based subcommands speak the line-oriented text format (see the
//! library's `textio` docs); `simulate` and `bench` emit CSV. `solve` and
//! `simulate` honor a `GJSIM_THREADS` environment override when `--threads`
//! is not given on the command line.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use gjsim_cli::{run_benchmark, write_csv, BenchConfig, MonotonicClock};
use gjsim_core::{
    default_eps, finish_solve, gauss_jordan_parallel_with_stats, gauss_jordan_serial, generate,
    read_system_with_beta, reduce, simulate, write_reduction, write_system, Family, GenSpec,
    Kernel, ReductionResult, Result, SimulationConfig, SolveOutcome, SolverMode,
    TimeVaryingSystem,
};

#[derive(Parser)]
#[command(
    name = "gjsim",
    version,
    about = "Gauss-Jordan solvers for time-varying linear systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a system at one instant (finishing from a saved boundary when
    /// the input carries a BETA trailer).
    Solve(SolveArgs),
    /// Reduce the constant prefix once and save it with its boundary.
    Reduce(ReduceArgs),
    /// Sweep a system over time steps; CSV per step.
    Simulate(SimulateArgs),
    /// Generate a seeded test system.
    Gen(GenArgs),
    /// Time per-step solves over a grid of sizes, threads, and boundaries.
    Bench(BenchArgs),
}

#[derive(clap::Args)]
struct SolveArgs {
    /// System file in the text format.
    #[arg(long)]
    input: PathBuf,
    /// Instant at which variables are evaluated.
    #[arg(long, default_value_t = 0.0)]
    at: f64,
    /// Worker threads; 1 selects the serial kernel.
    #[arg(long, env = "GJSIM_THREADS", default_value_t = 1)]
    threads: usize,
    /// Pivot tolerance override (default derives from the matrix norm).
    #[arg(long)]
    eps: Option<f64>,
    /// Print op counts (and per-worker phase timings) to stderr.
    #[arg(long)]
    diagnostics: bool,
}

#[derive(clap::Args)]
struct ReduceArgs {
    /// System file in the text format.
    #[arg(long)]
    input: PathBuf,
    /// Destination (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Pivot tolerance override.
    #[arg(long)]
    eps: Option<f64>,
}

#[derive(clap::Args)]
struct SimulateArgs {
    /// System file in the text format.
    #[arg(long)]
    input: PathBuf,
    /// Sweep start time.
    #[arg(long, default_value_t = 0.0)]
    t0: f64,
    /// Time step.
    #[arg(long, default_value_t = 0.1)]
    dt: f64,
    /// Number of steps.
    #[arg(long, default_value_t = 10)]
    steps: usize,
    /// Solving strategy per step.
    #[arg(long, value_enum, default_value_t = ModeArg::ReducedSerial)]
    mode: ModeArg,
    /// Worker threads for the parallel modes.
    #[arg(long, env = "GJSIM_THREADS", default_value_t = 2)]
    threads: usize,
    /// Destination CSV (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Pivot tolerance override.
    #[arg(long)]
    eps: Option<f64>,
}

#[derive(clap::Args)]
struct GenArgs {
    /// Structural family of the generated system.
    #[arg(long, value_enum, default_value_t = FamilyArg::RandomDense)]
    family: FamilyArg,
    /// System order.
    #[arg(long)]
    n: usize,
    /// Generator seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Target boundary as a fraction of n (first variable lands at
    /// (round(f*n), round(f*n))).
    #[arg(long = "reduction-fraction", default_value_t = 0.0)]
    reduction_fraction: f64,
    /// Additional variables planted beyond the boundary.
    #[arg(long = "extra-vars", default_value_t = 2)]
    extra_vars: usize,
    /// Destination (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct BenchArgs {
    /// Families to run.
    #[arg(long, value_enum, value_delimiter = ',',
          default_values_t = [FamilyArg::RandomDense, FamilyArg::CircuitSparse])]
    families: Vec<FamilyArg>,
    /// System orders.
    #[arg(long, value_delimiter = ',', default_values_t = [128, 512, 1024, 2040])]
    sizes: Vec<usize>,
    /// Thread counts to sweep.
    #[arg(long = "threads-list", value_delimiter = ',', default_values_t = [1, 2, 4, 8])]
    threads_list: Vec<usize>,
    /// Boundary fractions to sweep.
    #[arg(long = "reduction-list", value_delimiter = ',', default_values_t = [0.0, 0.19, 0.5])]
    reduction_list: Vec<f64>,
    /// Timed repetitions per cell.
    #[arg(long, default_value_t = 200)]
    reps: usize,
    /// Discarded warmup repetitions per cell.
    #[arg(long, default_value_t = 10)]
    warmup: usize,
    /// Generator seed shared by every cell.
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    /// Destination report (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    RandomDense,
    CircuitSparse,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Family {
        match f {
            FamilyArg::RandomDense => Family::RandomDense,
            FamilyArg::CircuitSparse => Family::CircuitSparse,
        }
    }
}

impl std::fmt::Display for FamilyArg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", Family::from(*self))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    FullSerial,
    FullParallel,
    ReducedSerial,
    ReducedParallel,
}

impl ModeArg {
    fn to_mode(self, threads: usize) -> SolverMode {
        match self {
            ModeArg::FullSerial => SolverMode::Full(Kernel::Serial),
            ModeArg::FullParallel => SolverMode::Full(Kernel::Parallel { threads }),
            ModeArg::ReducedSerial => SolverMode::Reduced(Kernel::Serial),
            ModeArg::ReducedParallel => SolverMode::Reduced(Kernel::Parallel { threads }),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("gjsim: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Solve(args) => cmd_solve(args),
        Command::Reduce(args) => cmd_reduce(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Gen(args) => cmd_gen(args),
        Command::Bench(args) => cmd_bench(args),
    }
}

fn read_input(path: &Path) -> Result<(TimeVaryingSystem, Option<usize>)> {
    read_system_with_beta(BufReader::new(File::open(path)?))
}

fn output_writer(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn cmd_solve(args: SolveArgs) -> Result<ExitCode> {
    let (sys, beta) = read_input(&args.input)?;
    let eps = args.eps.unwrap_or_else(|| default_eps(sys.base()));
    let outcome: SolveOutcome = match beta {
        Some(boundary) => {
            // The file is a saved reduction: finish from its boundary.
            let red = ReductionResult::resume(&sys, boundary)?;
            let kernel = if args.threads == 1 {
                Kernel::Serial
            } else {
                Kernel::Parallel {
                    threads: args.threads,
                }
            };
            finish_solve(&red, args.at, kernel, eps)?
        }
        None => {
            let instance = sys.inject(args.at)?;
            if args.threads == 1 {
                gauss_jordan_serial(&instance, eps)?
            } else {
                let (outcome, stats) =
                    gauss_jordan_parallel_with_stats(&instance, args.threads, eps)?;
                if args.diagnostics {
                    for w in &stats.workers {
                        eprintln!(
                            "worker {}: rows {}..{}, pre {} ns, diagonal {} ns, post {} ns, \
                             {} element updates, {} swaps",
                            w.rank,
                            w.first_row,
                            w.first_row + w.rows,
                            w.pre_ns,
                            w.diagonal_ns,
                            w.post_ns,
                            w.counters.element_updates(),
                            w.swaps,
                        );
                    }
                    eprintln!("pivot elements stored: {}", stats.pivot_elements_stored);
                }
                outcome
            }
        }
    };
    if args.diagnostics {
        eprintln!(
            "swaps: {}, element updates: {}, row ops: {}",
            outcome.swaps_performed,
            outcome.counters.element_updates(),
            outcome.counters.row_ops(),
        );
    }
    let mut out = io::stdout().lock();
    for v in outcome.solution.as_slice() {
        writeln!(out, "{v}")?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_reduce(args: ReduceArgs) -> Result<ExitCode> {
    let (sys, _) = read_input(&args.input)?;
    let eps = args.eps.unwrap_or_else(|| default_eps(sys.base()));
    let (red, counters) = reduce(&sys, eps);
    if red.completed() < red.boundary() {
        eprintln!(
            "gjsim: constant prefix is singular at column {}; saving the {} completed column(s)",
            red.completed(),
            red.completed(),
        );
    }
    let red = red.clamped_to_completed();
    eprintln!(
        "reduced {} of {} columns ({} element updates, one-time)",
        red.boundary(),
        sys.n(),
        counters.element_updates(),
    );
    let mut w = output_writer(args.out.as_deref())?;
    write_reduction(&mut w, &red)?;
    w.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_simulate(args: SimulateArgs) -> Result<ExitCode> {
    let (sys, _) = read_input(&args.input)?;
    let cfg = SimulationConfig {
        t0: args.t0,
        dt: args.dt,
        steps: args.steps,
        mode: args.mode.to_mode(args.threads),
        eps: args.eps,
    };
    let series = simulate(&sys, &cfg)?;
    if let Some(r) = series.reduction() {
        eprintln!(
            "one-time reduction: {} of {} columns, {} element updates",
            r.completed,
            sys.n(),
            r.counters.element_updates(),
        );
    }
    let mut w = output_writer(args.out.as_deref())?;
    write!(w, "t")?;
    for i in 0..sys.n() {
        write!(w, ",x{i}")?;
    }
    writeln!(w, ",element_updates")?;
    for ((t, state), counters) in series
        .times()
        .iter()
        .zip(series.states())
        .zip(series.step_counters())
    {
        write!(w, "{t}")?;
        for v in state.as_slice() {
            write!(w, ",{v}")?;
        }
        writeln!(w, ",{}", counters.element_updates())?;
    }
    w.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_gen(args: GenArgs) -> Result<ExitCode> {
    let sys = generate(&GenSpec {
        n: args.n,
        seed: args.seed,
        family: args.family.into(),
        reduction_fraction: args.reduction_fraction,
        extra_vars: args.extra_vars,
    })?;
    let mut w = output_writer(args.out.as_deref())?;
    write_system(&mut w, &sys)?;
    w.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_bench(args: BenchArgs) -> Result<ExitCode> {
    let cfg = BenchConfig {
        families: args.families.iter().map(|&f| f.into()).collect(),
        sizes: args.sizes.clone(),
        threads: args.threads_list.clone(),
        fractions: args.reduction_list.clone(),
        reps: args.reps,
        warmup: args.warmup,
        seed: args.seed,
    };
    let mut clock = MonotonicClock::new();
    let report = run_benchmark(&cfg, &mut clock, |row| match (&row.mean_ns, &row.error) {
        (Some(mean), _) => eprintln!(
            "bench {} n={} threads={} fraction={}: mean {:.0} ns (kept {}/{})",
            row.family,
            row.n,
            row.threads,
            row.reduction_fraction,
            mean,
            row.kept.unwrap_or(0),
            row.reps,
        ),
        (None, Some(e)) => eprintln!(
            "bench {} n={} threads={} fraction={}: FAILED: {e}",
            row.family, row.n, row.threads, row.reduction_fraction,
        ),
        (None, None) => {}
    })?;
    let mut w = output_writer(args.out.as_deref())?;
    match args.format {
        FormatArg::Csv => write_csv(&mut w, &report)?,
        FormatArg::Json => {
            let json = serde_json::to_string_pretty(&report).map_err(io::Error::from)?;
            writeln!(w, "{json}")?;
        }
    }
    w.flush()?;
    Ok(if report.all_ok() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}
