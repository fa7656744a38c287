//! Shared inputs for the kernel benchmarks.

use csym_core::doubling::{build_doubled, DoubledProblem};
use csym_core::fixtures::{f_min, f_zero, race_schrodinger, Problem};
use csym_core::random::Sampler;
use csym_core::{CMat, LinearRelation, Tolerance};

pub fn tol() -> Tolerance {
    Tolerance::default()
}

/// Named problems used across benchmarks.
pub fn problems() -> Vec<(&'static str, Problem)> {
    vec![
        ("f_zero", f_zero(tol())),
        ("f_min", f_min(tol())),
        ("race_16", race_schrodinger(16, 0.25, tol()).expect("race fixture")),
    ]
}

pub fn doubled(p: &Problem) -> DoubledProblem {
    build_doubled(&p.relation, &p.conjugation).expect("doubling")
}

pub fn gaussian(n: usize, seed: u64) -> CMat {
    Sampler::new(seed).gaussian_matrix(n, n)
}

pub fn random_relation(n: usize, k: usize, seed: u64) -> LinearRelation {
    LinearRelation::from_graph(Sampler::new(seed).subspace(2 * n, k, tol())).expect("relation")
}
