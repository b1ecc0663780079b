//! Deterministic test-system generators.
//!
//! Two families, both reproducible from `(family, n, seed)` alone:
//!
//! * [`Family::RandomDense`] — uniform entries with a diagonal boost that
//!   makes every instance strictly diagonally dominant (hence nonsingular
//!   without pivot swaps, the common case for solver benchmarking);
//! * [`Family::CircuitSparse`] — a resistive ladder driven by one source,
//!   giving the interleaved node-balance / loop-voltage structure of circuit
//!   equations: at most four nonzeros per row, and at `n = 3` exactly the
//!   shape of [`example_circuit`](crate::simulation::example_circuit).
//!
//! A requested reduction fraction places the first time-varying entry at
//! `(β, β)` with `β = round(fraction · n)`, so the derived reduction
//! boundary equals the request; any extra variables land at positions
//! `>= β` in both coordinates and cannot shrink it. Randomness flows
//! through a counter-based stream cipher seeded from the `u64`, with the
//! `u64 -> [0, 1)` mapping spelled out here, so generated systems are
//! byte-identical across platforms. Every generated base (and a few sampled
//! instants) is verified solvable against the reference eliminator; on the
//! astronomically unlikely failure the seed is perturbed and generation
//! retried a bounded number of times.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::AugmentedMatrix;
use crate::oracle::oracle_solve;
use crate::system::{TimeFunction, TimeVaryingSystem, VariableEntry};

/// Structural family of a generated system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    RandomDense,
    CircuitSparse,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Family::RandomDense => write!(f, "random-dense"),
            Family::CircuitSparse => write!(f, "circuit-sparse"),
        }
    }
}

/// Full recipe for one generated system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenSpec {
    pub n: usize,
    pub seed: u64,
    pub family: Family,
    /// Target boundary as a fraction of `n`: the first variable is planted
    /// at `(β, β)` with `β = round(fraction * n)`. A fraction of 1 yields a
    /// fully constant system (no variable fits at `(n, n)`).
    pub reduction_fraction: f64,
    /// Additional variables planted at positions `>= β` (best effort —
    /// collisions are skipped).
    pub extra_vars: usize,
}

impl GenSpec {
    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig {
                reason: "generated system order must be at least 1".to_string(),
            });
        }
        let f = self.reduction_fraction;
        if !f.is_finite() || !(0.0..=1.0).contains(&f) {
            return Err(Error::InvalidConfig {
                reason: format!("reduction fraction must lie in [0, 1], got {f}"),
            });
        }
        Ok(())
    }

    /// The boundary the generated system's variable placement induces.
    pub fn target_boundary(&self) -> usize {
        ((self.reduction_fraction * self.n as f64).round() as usize).min(self.n)
    }
}

const MAX_ATTEMPTS: u64 = 32;
/// Instants probed when verifying that injected instances stay solvable.
const PROBE_INSTANTS: [f64; 3] = [0.0, 0.37, 1.13];

/// Maps a full-entropy `u64` to `[0, 1)` using the top 53 bits, the exact
/// spacing of representable doubles in that range — fixed here (rather than
/// borrowed from a distribution crate) so the byte stream of generated
/// systems never shifts under dependency upgrades.
fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn range(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * unit(rng)
}

/// Log-uniform draw, used for resistances so magnitudes spread across the
/// whole 10 Ω .. 10 kΩ band instead of clustering near the top.
fn range_log(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    range(rng, lo.ln(), hi.ln()).exp()
}

fn random_time_function(rng: &mut ChaCha8Rng) -> TimeFunction {
    // Values stay within (0, 9.5): positive, bounded, and small next to the
    // diagonal boost / resistance scale, so injection cannot plausibly make
    // an instance singular (and the probe instants verify it didn't).
    if rng.next_u64() % 4 == 0 {
        TimeFunction::Constant {
            value: range(rng, 1.0, 5.0),
        }
    } else {
        let offset = range(rng, 1.0, 5.0);
        TimeFunction::Sinusoid {
            offset,
            amplitude: range(rng, 0.1, 0.9) * offset,
            frequency: range(rng, 0.1, 2.0),
            phase: range(rng, 0.0, 2.0 * std::f64::consts::PI),
        }
    }
}

fn dense_rows(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    let boost = 10.0 * n as f64;
    (0..n)
        .map(|i| {
            (0..=n)
                .map(|j| {
                    let v = range(rng, -10.0, 10.0);
                    if i == j {
                        v + boost
                    } else {
                        v
                    }
                })
                .collect()
        })
        .collect()
}

/// Resistive ladder: a source branch feeds a chain of nodes; each interior
/// node sheds a shunt branch and passes the rest down a rail branch; the
/// last node ends in one (even `n`) or two (odd `n`) terminal branches.
/// Unknowns are the `n` branch currents, ordered source, then shunt/rail
/// pairs, then terminals. Rows interleave current balance at node `k` with
/// the voltage loop through shunts `k-1` and `k`.
fn circuit_rows(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    let resistance: Vec<f64> = (0..n).map(|_| range_log(rng, 10.0, 10_000.0)).collect();
    let emf = range(rng, 1.0, 24.0);

    let mut rows = vec![vec![0.0; n + 1]; n];
    if n == 1 {
        rows[0][0] = resistance[0];
        rows[0][1] = emf;
        return rows;
    }

    let nodes = n / 2; // odd n = 2*nodes + 1, even n = 2*nodes
    let odd = n % 2 == 1;
    let term_a = if odd { n - 2 } else { n - 1 };
    // Branch indices: source 0; shunt_k = 2k-1, rail_k = 2k for
    // k = 1 .. nodes-1; terminals term_a (and term_a + 1 when odd).
    let shunt = |k: usize| 2 * k - 1;
    let rail = |k: usize| 2 * k;

    let mut next_row = 0;
    for k in 1..=nodes {
        // Current balance at node k: in = shunt out (+ rail out).
        {
            let row = &mut rows[next_row];
            let incoming = if k == 1 { 0 } else { rail(k - 1) };
            row[incoming] = 1.0;
            if k < nodes {
                row[shunt(k)] = -1.0;
                row[rail(k)] = -1.0;
            } else {
                row[term_a] = -1.0;
                if odd {
                    row[term_a + 1] = -1.0;
                }
            }
            next_row += 1;
        }
        // Voltage loop closed through this node's shunt.
        {
            let row = &mut rows[next_row];
            let cur_shunt = if k < nodes { shunt(k) } else { term_a };
            if k == 1 {
                row[0] = resistance[0];
                row[cur_shunt] = resistance[cur_shunt];
                row[n] = emf;
            } else {
                let prev = shunt(k - 1);
                row[prev] = -resistance[prev];
                row[rail(k - 1)] = resistance[rail(k - 1)];
                row[cur_shunt] = resistance[cur_shunt];
            }
            next_row += 1;
        }
    }
    if odd {
        // Loop around the two terminal branches in parallel.
        let row = &mut rows[next_row];
        row[term_a] = -resistance[term_a];
        row[term_a + 1] = resistance[term_a + 1];
        next_row += 1;
    }
    debug_assert_eq!(next_row, n);
    rows
}

fn plant_variables(
    rng: &mut ChaCha8Rng,
    n: usize,
    beta: usize,
    extra: usize,
) -> Vec<VariableEntry> {
    if beta >= n {
        return Vec::new();
    }
    let mut vars = vec![VariableEntry {
        row: beta,
        col: beta,
        func: random_time_function(rng),
    }];
    let rows_avail = n - beta;
    let cols_avail = n + 1 - beta; // the free-term column may vary too
    for _ in 0..extra {
        let row = beta + rng.next_u64() as usize % rows_avail;
        let col = beta + rng.next_u64() as usize % cols_avail;
        let func = random_time_function(rng);
        if vars.iter().all(|v| (v.row, v.col) != (row, col)) {
            vars.push(VariableEntry { row, col, func });
        }
    }
    vars
}

fn generate_once(spec: &GenSpec, seed: u64) -> Result<TimeVaryingSystem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = match spec.family {
        Family::RandomDense => dense_rows(&mut rng, spec.n),
        Family::CircuitSparse => circuit_rows(&mut rng, spec.n),
    };
    let base = AugmentedMatrix::from_rows(&rows)?;
    let vars = plant_variables(&mut rng, spec.n, spec.target_boundary(), spec.extra_vars);
    TimeVaryingSystem::new(base, vars)
}

fn verified(sys: &TimeVaryingSystem) -> bool {
    PROBE_INSTANTS.iter().all(|&t| {
        sys.inject(t)
            .ok()
            .and_then(|inst| oracle_solve(&inst).ok())
            .is_some()
    })
}

/// Generates a system from the recipe. Deterministic: equal specs give
/// byte-identical systems, including across platforms.
pub fn generate(spec: &GenSpec) -> Result<TimeVaryingSystem> {
    spec.validate()?;
    for attempt in 0..MAX_ATTEMPTS {
        let seed = spec
            .seed
            .wrapping_add(attempt.wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let sys = generate_once(spec, seed)?;
        if verified(&sys) {
            return Ok(sys);
        }
    }
    Err(Error::GenerationFailed {
        attempts: MAX_ATTEMPTS as usize,
    })
}
