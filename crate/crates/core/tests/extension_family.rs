use csym_core::checks::all_ok;
use csym_core::csym::is_c_selfadjoint;
use csym_core::doubling::{build_doubled, deficiency, DoubledProblem};
use csym_core::extensions::{
    admissible_parameter, brute_force_extensions, canonical_extension, extension_from_parameter, l_manifolds,
    recover_parameter, ExtensionParameter,
};
use csym_core::fixtures::{f_min, f_zero, race_schrodinger, Problem};
use csym_core::random::Sampler;
use csym_core::{CsymError, Tolerance};
use rayon::prelude::*;

fn tol() -> Tolerance {
    Tolerance::default()
}

fn doubled(p: &Problem) -> DoubledProblem {
    build_doubled(&p.relation, &p.conjugation).unwrap()
}

fn round_trip_all(dp: &DoubledProblem, budget: usize) -> (usize, usize) {
    let bf = brute_force_extensions(dp, budget, 2024).unwrap();
    let recovered = bf
        .hits
        .par_iter()
        .filter(|h| {
            let p = recover_parameter(dp, h).unwrap();
            let r = extension_from_parameter(dp, &p).unwrap();
            r.a_ext.distance(h).unwrap() <= 1e-9 && r.a_ext.graph_dim() == h.graph_dim()
        })
        .count();
    (bf.hits.len(), recovered)
}

#[test]
fn f_zero_hits_all_round_trip() {
    let dp = doubled(&f_zero(tol()));
    let (hits, recovered) = round_trip_all(&dp, 2000);
    assert!(hits > 0);
    assert_eq!(hits, recovered);
}

#[test]
fn f_zero_l_manifolds_split_four_dimensional_m() {
    let dp = doubled(&f_zero(tol()));
    let r = canonical_extension(&dp, false).unwrap();
    let l = l_manifolds(&r, &dp).unwrap();
    assert_eq!(l.l_a.dim(), 2);
    assert!(all_ok(&l.checks), "{:#?}", l.checks);
    assert!(is_c_selfadjoint(&r.a_ext, dp.c()).unwrap());
}

#[test]
fn race_model_extensions_are_sound() {
    let p = race_schrodinger(16, 0.25, tol()).unwrap();
    let dp = doubled(&p);
    let def = deficiency(&dp).unwrap();
    assert_eq!(def.n_plus.dim(), def.n_minus.dim());
    let mut rng = Sampler::new(11);
    for _ in 0..3 {
        let param = admissible_parameter(&dp, &mut rng).unwrap();
        let r = extension_from_parameter(&dp, &param).unwrap();
        assert!(all_ok(&r.checks), "{:#?}", r.checks);
    }
}

#[test]
fn wrong_size_parameter_is_rejected() {
    let dp = doubled(&f_min(tol()));
    let p = ExtensionParameter::Onb(csym_core::CMat::identity(4, 1));
    assert!(matches!(extension_from_parameter(&dp, &p), Err(CsymError::Input(_))));
}
