use csym_core::csym::is_c_selfadjoint;
use csym_core::doubling::build_doubled;
use csym_core::extensions::{admissible_parameter, extension_from_parameter};
use csym_core::fixtures::random_restriction;
use csym_core::random::Sampler;
use csym_core::{Check, LinearRelation, Subspace, Tolerance};
use proptest::prelude::*;

fn tol() -> Tolerance {
    Tolerance::default()
}

fn relation(seed: u64, n: usize, k: usize) -> LinearRelation {
    let mut rng = Sampler::new(seed);
    LinearRelation::from_graph(rng.random_subspace(2 * n, k.min(2 * n), tol())).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn adjoint_is_an_involution(seed in any::<u64>(), n in 1usize..5, k in 0usize..9) {
        let r = relation(seed, n, k);
        prop_assert!(r.adjoint().adjoint().equals(&r).unwrap());
    }

    #[test]
    fn graph_dimensions_of_adjoint_sum_to_ambient(seed in any::<u64>(), n in 1usize..5, k in 0usize..9) {
        let r = relation(seed, n, k);
        prop_assert_eq!(r.graph_dim() + r.adjoint().graph_dim(), 2 * n);
    }

    #[test]
    fn adjoint_commutes_with_conjugation(seed in any::<u64>(), n in 1usize..5, k in 0usize..9) {
        let r = relation(seed, n, k);
        let c = Sampler::new(seed ^ 1).conjugation(n);
        let lhs = r.conjugate(&c).unwrap().adjoint();
        let rhs = r.adjoint().conjugate(&c).unwrap();
        prop_assert!(lhs.equals(&rhs).unwrap());
    }

    #[test]
    fn complement_is_an_involution(seed in any::<u64>(), n in 1usize..9, k in 0usize..9) {
        let mut rng = Sampler::new(seed);
        let s = rng.random_subspace(n, k.min(n), tol());
        let cc = s.complement().complement();
        prop_assert!(cc.equals(&s).unwrap());
        prop_assert_eq!(s.dim() + s.complement().dim(), n);
    }

    #[test]
    fn modular_dimension_law(seed in any::<u64>(), n in 1usize..8, k1 in 0usize..8, k2 in 0usize..8) {
        let mut rng = Sampler::new(seed);
        let shared = rng.random_subspace(n, (k1.min(k2) / 2).min(n), tol());
        let extend = |rng: &mut Sampler, k: usize| {
            let extra = rng.random_subspace(n, k.min(n), tol());
            shared.sum(&extra).unwrap()
        };
        let s: Subspace = extend(&mut rng, k1 / 2);
        let t: Subspace = extend(&mut rng, k2 / 2);
        let sum = s.sum(&t).unwrap();
        let cap = s.intersect(&t).unwrap();
        prop_assert_eq!(sum.dim() + cap.dim(), s.dim() + t.dim());
    }

    #[test]
    fn admissible_parameters_give_c_selfadjoint_extensions(seed in any::<u64>(), n in 2usize..6, k in 1usize..5) {
        let mut rng = Sampler::new(seed);
        let p = random_restriction(&mut rng, n, k.min(n - 1), tol()).unwrap();
        let dp = build_doubled(&p.relation, &p.conjugation).unwrap();
        let param = admissible_parameter(&dp, &mut rng).unwrap();
        let r = extension_from_parameter(&dp, &param).unwrap();
        prop_assert!(r.checks.iter().all(Check::ok), "{:#?}", r.checks);
        prop_assert!(is_c_selfadjoint(&r.a_ext, &p.conjugation).unwrap());
        prop_assert!(p.relation.leq(&r.a_ext).unwrap());
    }
}
