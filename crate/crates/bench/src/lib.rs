//! Shared input preparation for the benchmark targets: seeded systems from
//! both generator families, plus ready-made reductions so the timed bodies
//! measure solving only.

use gjsim_core::{
    default_eps, generate, reduce, AugmentedMatrix, Family, GenSpec, ReductionResult,
    TimeVaryingSystem,
};

/// Fixed seed so every benchmark run sees identical inputs.
pub const BENCH_SEED: u64 = 2024;

/// A fully constant system of order `n` (no variable entries), ready for
/// direct kernel timing on its base matrix.
pub fn constant_system(family: Family, n: usize) -> TimeVaryingSystem {
    generate(&GenSpec {
        n,
        seed: BENCH_SEED,
        family,
        reduction_fraction: 1.0,
        extra_vars: 0,
    })
    .expect("seeded generation succeeds")
}

/// Base matrix and pivot tolerance for [`constant_system`].
pub fn constant_input(family: Family, n: usize) -> (AugmentedMatrix, f64) {
    let sys = constant_system(family, n);
    let eps = default_eps(sys.base());
    (sys.base().clone(), eps)
}

/// A system with variables past `round(fraction * n)`, already reduced, so
/// benchmarks can time per-step finishing in isolation.
pub fn reduced_input(family: Family, n: usize, fraction: f64) -> (ReductionResult, f64) {
    let sys = generate(&GenSpec {
        n,
        seed: BENCH_SEED,
        family,
        reduction_fraction: fraction,
        extra_vars: 2,
    })
    .expect("seeded generation succeeds");
    let eps = default_eps(sys.base());
    let (red, _) = reduce(&sys, eps);
    assert_eq!(
        red.completed(),
        red.boundary(),
        "benchmark inputs must reduce through their whole boundary"
    );
    (red, eps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prepared_inputs_are_deterministic_and_solvable() {
        let (a, eps) = constant_input(Family::RandomDense, 16);
        let (b, _) = constant_input(Family::RandomDense, 16);
        assert_eq!(a, b);
        gjsim_core::gauss_jordan_serial(&a, eps).expect("bench input solves");

        let (red, eps) = reduced_input(Family::CircuitSparse, 16, 0.5);
        assert_eq!(red.boundary(), 8);
        gjsim_core::finish_solve(&red, 0.25, gjsim_core::Kernel::Serial, eps)
            .expect("bench reduction finishes");
    }
}
