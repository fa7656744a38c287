//! C-self-adjoint extensions of a C-symmetric relation.
//!
//! Extensions are built on the doubled space first,
//! `graph(𝔄_U) = graph(𝔄) ∔ {(v - Uv, i(v + Uv)) : v ∈ N₊}`, and the block
//! `Ã` is read off the doubled relation afterwards.
//!
//! Parameters are stored in coordinates with respect to the orthonormal basis
//! `Q₊` of `N₊` held by the [`DoubledProblem`] and the basis `Q₋ = 𝔈 Q₊` of
//! `N₋`. In these bases a unitary `U : N₊ -> N₋` with matrix `W` and the
//! conjugation `𝔍 = 𝔈 U` of `N₊` have coordinate matrices related by
//! `M = conj(W)`, where `𝔍(Q₊ c) = Q₊ M conj(c)`.

use rayon::prelude::*;

use crate::antilinear::{invariant_onb, split_anti_involution, AntiLinearMap};
use crate::checks::Check;
use crate::csym::{anti_involution_matrix, c_selfadjoint_residual, doubled_conjugation_matrix, is_c_selfadjoint};
use crate::doubling::{antidiag_blocks, block_antidiag, parity_matrix, DoubledProblem};
use crate::error::{CsymError, Result};
use crate::linalg::{conj, hstack, spectral_norm, vstack, CMat, CVec, Subspace, C64, I};
use crate::random::Sampler;
use crate::relations::{LinearRelation, Regime};

/// One of the three equivalent descriptions of an extension.
#[derive(Debug, Clone, PartialEq)]
pub enum ExtensionParameter {
    /// Matrix `W` of `U : N₊ -> N₋` in the bases `Q₊`, `Q₋ = 𝔈 Q₊`.
    Unitary(CMat),
    /// Orthonormal basis of `N₊` as columns of length `2n`.
    Onb(CMat),
    /// Coordinate matrix `M` of a conjugation `𝔍` of `N₊`.
    Conjugation(CMat),
}

impl ExtensionParameter {
    pub fn kind(&self) -> &'static str {
        match self {
            ExtensionParameter::Unitary(_) => "unitary",
            ExtensionParameter::Onb(_) => "onb",
            ExtensionParameter::Conjugation(_) => "conjugation",
        }
    }

    /// Coordinate matrix of the associated conjugation `𝔍`.
    pub fn conjugation_coords(&self, dp: &DoubledProblem) -> Result<CMat> {
        let q = dp.n_plus.basis();
        let d = q.ncols();
        match self {
            ExtensionParameter::Unitary(w) => {
                check_square(w, d, "unitary")?;
                Ok(conj(w))
            }
            ExtensionParameter::Conjugation(m) => {
                check_square(m, d, "conjugation")?;
                Ok(m.clone())
            }
            ExtensionParameter::Onb(v) => {
                if v.nrows() != q.nrows() || v.ncols() != d {
                    return Err(CsymError::input(format!(
                        "onb parameter must be {}x{}, got {}x{}",
                        q.nrows(),
                        d,
                        v.nrows(),
                        v.ncols()
                    )));
                }
                let tol = dp.n_plus.tol();
                let g = crate::linalg::gram_residual(v);
                if g > tol.eps {
                    return Err(CsymError::input(format!(
                        "onb parameter is not orthonormal (Gram residual {g:.3e})"
                    )));
                }
                let outside = spectral_norm(&(v - dp.n_plus.projector() * v));
                if outside > tol.eps {
                    return Err(CsymError::input(format!(
                        "onb parameter does not lie in N+ (residual {outside:.3e})"
                    )));
                }
                let c = q.adjoint() * v;
                Ok(&c * c.transpose())
            }
        }
    }

    pub fn to_conjugation(&self, dp: &DoubledProblem) -> Result<ExtensionParameter> {
        Ok(ExtensionParameter::Conjugation(self.conjugation_coords(dp)?))
    }

    pub fn to_unitary(&self, dp: &DoubledProblem) -> Result<ExtensionParameter> {
        Ok(ExtensionParameter::Unitary(conj(&self.conjugation_coords(dp)?)))
    }

    /// An orthonormal basis of `N₊` fixed by `𝔍`.
    pub fn to_onb(&self, dp: &DoubledProblem) -> Result<ExtensionParameter> {
        let m = self.conjugation_coords(dp)?;
        check_conjugation_coords(&m, dp)?;
        let j = AntiLinearMap::new(ambient_conjugation(dp, &m));
        Ok(ExtensionParameter::Onb(invariant_onb(&j, &dp.n_plus)?))
    }
}

fn check_square(m: &CMat, d: usize, what: &str) -> Result<()> {
    if m.nrows() != d || m.ncols() != d {
        return Err(CsymError::input(format!(
            "{what} parameter must be {d}x{d} (dim N+), got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

/// `Q₋ = 𝔈 Q₊`.
pub fn minus_basis(dp: &DoubledProblem) -> CMat {
    dp.frak_c.apply_columns(dp.n_plus.basis())
}

/// Ambient matrix of `𝔍`, acting as `x ↦ J conj(x)` and vanishing off `N₊`.
pub fn ambient_conjugation(dp: &DoubledProblem, m: &CMat) -> CMat {
    let q = dp.n_plus.basis();
    q * m * q.transpose()
}

/// Ambient matrix of `U = 𝔈 𝔍`, vanishing off `N₊`.
pub fn ambient_unitary(dp: &DoubledProblem, m: &CMat) -> CMat {
    minus_basis(dp) * conj(m) * dp.n_plus.basis().adjoint()
}

/// Ambient matrix of `σ = 𝔈 Q`, an anti-involution of `N₊`.
pub fn sigma_matrix(dp: &DoubledProblem) -> CMat {
    dp.frak_c.matrix() * parity_matrix(dp.dim())
}

/// Coordinates of `σ` on `N₊`: `σ(Q₊ c) = Q₊ S conj(c)`.
fn sigma_coords(dp: &DoubledProblem) -> CMat {
    let q = dp.n_plus.basis();
    q.adjoint() * sigma_matrix(dp) * conj(q)
}

/// `(‖M M* - I‖, ‖M conj(M) - I‖)`: unitarity and the involution
/// condition `𝔈U𝔈U = I`.
pub fn conjugation_residuals(m: &CMat) -> (f64, f64) {
    let d = m.nrows();
    if d == 0 {
        return (0.0, 0.0);
    }
    let id = CMat::identity(d, d);
    (
        spectral_norm(&(m * m.adjoint() - &id)),
        spectral_norm(&(m * conj(m) - &id)),
    )
}

/// `‖(σ𝔍)² - I‖` on `N₊`; zero exactly when the doubled extension built from
/// `𝔍` is block antidiagonal.
pub fn decoupling_residual(dp: &DoubledProblem, m: &CMat) -> f64 {
    let d = m.nrows();
    if d == 0 {
        return 0.0;
    }
    let t = sigma_coords(dp) * conj(m);
    spectral_norm(&(&t * &t - CMat::identity(d, d)))
}

fn check_conjugation_coords(m: &CMat, dp: &DoubledProblem) -> Result<()> {
    let tol = dp.n_plus.tol();
    let (unitary, involution) = conjugation_residuals(m);
    if unitary > tol.eps {
        return Err(CsymError::input(format!(
            "parameter is not unitary (residual {unitary:.3e})"
        )));
    }
    if involution > tol.eps {
        return Err(CsymError::input(format!(
            "parameter violates 𝔈U𝔈U = I (residual {involution:.3e})"
        )));
    }
    Ok(())
}

fn check_c_symmetric(dp: &DoubledProblem) -> Result<()> {
    let tol = dp.a().tol();
    let sym = dp.pair.b.leq_residual(&dp.pair.a_star)?;
    if sym > tol.eps {
        return Err(CsymError::precondition(format!(
            "A is not C-symmetric (residual {sym:.3e})"
        )));
    }
    Ok(())
}

/// Graph-level dimensions of an extension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExtensionDims {
    pub graph_a: usize,
    pub graph_ext: usize,
    pub graph_b_star: usize,
    pub n_plus: usize,
    pub l: usize,
}

#[derive(Debug, Clone)]
pub struct ExtensionDiagnostics {
    pub is_operator: bool,
    pub is_c_selfadjoint: bool,
    pub dims: ExtensionDims,
}

#[derive(Debug, Clone)]
pub struct ExtensionResult {
    pub a_ext: LinearRelation,
    pub a_ext_star: LinearRelation,
    /// `graph(Ã) ⊖ graph(A)`.
    pub l_a: Subspace,
    /// `graph(Ã*) ⊖ graph(B)`.
    pub l_astar: Subspace,
    pub frak_ext: LinearRelation,
    pub parameter: CMat,
    pub diagnostics: ExtensionDiagnostics,
    pub checks: Vec<Check>,
}

/// Doubled extension `𝔄_U` for conjugation coordinates `m`.
fn doubled_extension(dp: &DoubledProblem, m: &CMat) -> Result<LinearRelation> {
    let q = dp.n_plus.basis();
    let u = ambient_unitary(dp, m);
    let uq = &u * q;
    let top = q - &uq;
    let bottom = (q + &uq) * I;
    let extra = vstack(&[&top, &bottom]);
    let g = hstack(&[dp.frak_a.graph().basis(), &extra]);
    LinearRelation::from_graph(Subspace::span_columns(&g, dp.a().tol()))
}

pub fn extension_from_parameter(dp: &DoubledProblem, p: &ExtensionParameter) -> Result<ExtensionResult> {
    check_c_symmetric(dp)?;
    let tol = dp.a().tol();
    let c = dp.c();
    let m = p.conjugation_coords(dp)?;
    check_conjugation_coords(&m, dp)?;
    let dec = decoupling_residual(dp, &m);
    if dec > tol.eps {
        return Err(CsymError::violation(
            "extension.decoupling",
            "the doubled extension is not block antidiagonal: (σ𝔍)² ≠ I on N+",
            dec,
        ));
    }

    let frak_ext = doubled_extension(dp, &m)?;
    let mut checks = Vec::new();
    checks.push(Check::residual(
        "extension.doubled_selfadjoint",
        frak_ext.distance(&frak_ext.adjoint())?,
        tol.eps,
    ));
    let ee = doubled_conjugation_matrix(&dp.frak_c);
    checks.push(Check::residual(
        "extension.doubled_frak_c_invariant",
        frak_ext.graph().anti_image(&ee)?.distance(frak_ext.graph())?,
        tol.eps,
    ));

    let (a_ext, bottom) = antidiag_blocks(&frak_ext)?;
    let rebuilt = block_antidiag(&a_ext, &a_ext.conjugate(c)?)?;
    let split = rebuilt.distance(&frak_ext)?;
    if split > tol.eps || rebuilt.graph_dim() != frak_ext.graph_dim() {
        return Err(CsymError::violation(
            "extension.block_extraction",
            "extracted blocks do not reproduce the doubled extension",
            split,
        ));
    }
    checks.push(Check::residual(
        "extension.bottom_block_is_conjugate",
        bottom.distance(&a_ext.conjugate(c)?)?,
        tol.eps,
    ));
    let a_ext_star = a_ext.adjoint();
    checks.push(Check::residual(
        "extension.contains_a",
        dp.a().leq_residual(&a_ext)?,
        tol.eps,
    ));
    checks.push(Check::residual(
        "extension.within_b_star",
        a_ext.leq_residual(&dp.pair.b_star)?,
        tol.eps,
    ));
    let csa = c_selfadjoint_residual(&a_ext, c)?;
    checks.push(Check::residual("extension.c_selfadjoint", csa, tol.eps));
    checks.extend(remark_identity_checks(dp, &m, &frak_ext)?);
    checks.extend(blockwise_checks(dp, &m, &a_ext, &a_ext_star)?);
    checks.push(domain_formula_check(dp, &m, &a_ext)?);

    let l = l_manifolds_of(dp, &a_ext, &a_ext_star)?;
    checks.extend(l.checks.iter().cloned());

    let diagnostics = ExtensionDiagnostics {
        is_operator: a_ext.is_operator(),
        is_c_selfadjoint: csa <= tol.eps,
        dims: ExtensionDims {
            graph_a: dp.a().graph_dim(),
            graph_ext: a_ext.graph_dim(),
            graph_b_star: dp.pair.b_star.graph_dim(),
            n_plus: dp.n_plus.dim(),
            l: l.l_a.dim(),
        },
    };
    Ok(ExtensionResult {
        a_ext,
        a_ext_star,
        l_a: l.l_a,
        l_astar: l.l_astar,
        frak_ext,
        parameter: m,
        diagnostics,
        checks,
    })
}

/// `𝔄_𝔳(Im v) = Re v` for each vector of an `𝔍`-fixed basis, with real and
/// imaginary parts taken with respect to `𝔈`.
fn remark_identity_checks(dp: &DoubledProblem, m: &CMat, frak_ext: &LinearRelation) -> Result<Vec<Check>> {
    let tol = dp.a().tol();
    if m.nrows() == 0 {
        return Ok(vec![Check::residual("extension.remark_re_im", 0.0, tol.eps)]);
    }
    let j = AntiLinearMap::new(ambient_conjugation(dp, m));
    let v = invariant_onb(&j, &dp.n_plus)?;
    let ev = dp.frak_c.apply_columns(&v);
    let mut worst: f64 = 0.0;
    for k in 0..v.ncols() {
        let vk = v.column(k).into_owned();
        let ek = ev.column(k).into_owned();
        let re = (&vk + &ek) * C64::new(0.5, 0.0);
        let im = (&vk - &ek) * (-0.5 * I);
        worst = worst.max(frak_ext.pair_residual(&im, &re));
    }
    Ok(vec![Check::residual("extension.remark_re_im", worst, tol.eps)])
}

/// With `U` in `2 x 2` block form and `v = (x₊, y₊) ∈ N₊`:
/// `(y₊ - U₂₁x₊ - U₂₂y₊, i(x₊ + U₁₁x₊ + U₁₂y₊)) ∈ A_U` and
/// `(x₊ - U₁₁x₊ - U₁₂y₊, i(y₊ + U₂₁x₊ + U₂₂y₊)) ∈ A_U*`.
fn blockwise_checks(
    dp: &DoubledProblem,
    m: &CMat,
    a_ext: &LinearRelation,
    a_ext_star: &LinearRelation,
) -> Result<Vec<Check>> {
    let tol = dp.a().tol();
    let n = dp.dim();
    let u = ambient_unitary(dp, m);
    let (u11, u12) = (u.view((0, 0), (n, n)), u.view((0, n), (n, n)));
    let (u21, u22) = (u.view((n, 0), (n, n)), u.view((n, n), (n, n)));
    let q = dp.n_plus.basis();
    let (mut first, mut second): (f64, f64) = (0.0, 0.0);
    for k in 0..q.ncols() {
        let x = q.view((0, k), (n, 1)).into_owned();
        let y = q.view((n, k), (n, 1)).into_owned();
        let ux = &u11 * &x + &u12 * &y;
        let uy = &u21 * &x + &u22 * &y;
        let p1: CVec = (&y - &uy).column(0).into_owned();
        let v1: CVec = ((&x + &ux) * I).column(0).into_owned();
        let p2: CVec = (&x - &ux).column(0).into_owned();
        let v2: CVec = ((&y + &uy) * I).column(0).into_owned();
        first = first.max(a_ext.pair_residual(&p1, &v1));
        second = second.max(a_ext_star.pair_residual(&p2, &v2));
    }
    Ok(vec![
        Check::residual("extension.blockwise_a_u", first, tol.eps),
        Check::residual("extension.blockwise_a_u_star", second, tol.eps),
    ])
}

/// `D(A_U) = D(A) ∔ P₂(I - U)N₊`.
fn domain_formula_check(dp: &DoubledProblem, m: &CMat, a_ext: &LinearRelation) -> Result<Check> {
    let tol = dp.a().tol();
    let n = dp.dim();
    let q = dp.n_plus.basis();
    let u = ambient_unitary(dp, m);
    let moved = q - &u * q;
    let p2 = moved.rows(n, n).into_owned();
    let dom_a = dp.a().domain();
    let predicted = Subspace::span_columns(&hstack(&[dom_a.basis(), &p2]), tol);
    Ok(Check::residual(
        "extension.domain_formula",
        predicted.distance(&a_ext.domain())?,
        tol.eps,
    ))
}

#[derive(Debug, Clone)]
pub struct LManifolds {
    pub l_a: Subspace,
    pub l_astar: Subspace,
    pub checks: Vec<Check>,
}

/// Graph-level L-manifolds of an extension together with the decomposition
/// checks `L ⊥ S̃L`, `L ⊕ S̃L = 𝔐` and the quotient-dimension identity.
pub fn l_manifolds(res: &ExtensionResult, dp: &DoubledProblem) -> Result<LManifolds> {
    let l = l_manifolds_of(dp, &res.a_ext, &res.a_ext_star)?;
    if dp.regime() == Regime::Operator {
        if let Some(bad) = l.checks.iter().find(|c| !c.ok()) {
            return Err(CsymError::violation(bad.key.clone(), "L-manifold check failed", bad.residual));
        }
    }
    Ok(l)
}

fn l_manifolds_of(dp: &DoubledProblem, a_ext: &LinearRelation, a_ext_star: &LinearRelation) -> Result<LManifolds> {
    let tol = dp.a().tol();
    let c = dp.c();
    let pair = &dp.pair;
    let m_space = pair.b_star.graph().minus(pair.a.graph())?;
    let l_a = a_ext.graph().minus(pair.a.graph())?;
    let l_astar = a_ext_star.graph().minus(pair.b.graph())?;
    let s = anti_involution_matrix(c);
    let sl = l_a.anti_image(&s)?;
    let mut checks = vec![
        Check::residual("l_manifold.orthogonal", l_a.orthogonality_residual(&sl)?, tol.eps),
        Check::residual("l_manifold.spans_m", l_a.sum(&sl)?.distance(&m_space)?, tol.eps),
        Check::flag("l_manifold.dimension_sum", l_a.dim() + sl.dim() == m_space.dim()),
        Check::residual(
            "l_manifold.astar_is_conjugate",
            l_a.anti_image(&doubled_conjugation_matrix(c))?.distance(&l_astar)?,
            tol.eps,
        ),
        Check::flag(
            "l_manifold.quotient_dims",
            pair.b_star.graph_dim() + pair.a.graph_dim() == 2 * a_ext.graph_dim(),
        ),
    ];
    if dp.regime() == Regime::Relation {
        checks = checks.into_iter().map(|ch| if ch.passed { ch } else { ch.report_only() }).collect();
    }
    Ok(LManifolds { l_a, l_astar, checks })
}

/// Recovers the conjugation `𝔍` of `N₊` whose extension is `ã`.
pub fn recover_parameter(dp: &DoubledProblem, a_tilde: &LinearRelation) -> Result<ExtensionParameter> {
    let tol = dp.a().tol();
    let c = dp.c();
    if a_tilde.dim() != dp.dim() {
        return Err(CsymError::input("extension acts on a different space"));
    }
    if !dp.a().leq(a_tilde)? {
        return Err(CsymError::precondition("the relation does not extend A"));
    }
    if !is_c_selfadjoint(a_tilde, c)? {
        return Err(CsymError::precondition("the relation is not C-self-adjoint"));
    }
    let d = dp.n_plus.dim();
    if d == 0 {
        return Ok(ExtensionParameter::Conjugation(CMat::zeros(0, 0)));
    }
    let t = block_antidiag(a_tilde, &a_tilde.conjugate(c)?)?;
    let extra = t.graph().minus(dp.frak_a.graph())?;
    if extra.dim() != d {
        return Err(CsymError::violation(
            "recover.dimension",
            format!("graph(𝔗) ⊖ graph(𝔄) has dimension {} instead of {d}", extra.dim()),
            (extra.dim() as f64 - d as f64).abs(),
        ));
    }
    let nn = 2 * dp.dim();
    let e = extra.basis();
    let a = e.rows(0, nn).into_owned();
    let b = e.rows(nn, nn).into_owned();
    let v = (&a - &b * I) * C64::new(0.5, 0.0);
    let w = (&a + &b * I) * C64::new(0.5, 0.0);
    let qp = dp.n_plus.basis();
    let qm = minus_basis(dp);
    let vc = qp.adjoint() * &v;
    let wc = -(qm.adjoint() * &w);
    let leak = spectral_norm(&(&v - qp * &vc)).max(spectral_norm(&(&w + &qm * &wc)));
    if leak > tol.sqrt_eps() {
        return Err(CsymError::violation(
            "recover.deficiency_components",
            "components do not lie in the deficiency spaces",
            leak,
        ));
    }
    let vinv = vc.clone().try_inverse().ok_or_else(|| {
        CsymError::violation("recover.invertible", "N+ components are linearly dependent", 1.0)
    })?;
    let wmat = wc * vinv;
    Ok(ExtensionParameter::Conjugation(conj(&wmat)))
}

/// Uniformly random admissible conjugation: `𝔍 = (P_E - P_σE) σ` for a random
/// splitting `N₊ = E ⊕ σE`.
pub fn admissible_parameter(dp: &DoubledProblem, rng: &mut Sampler) -> Result<ExtensionParameter> {
    let d = dp.n_plus.dim();
    if d == 0 {
        return Ok(ExtensionParameter::Conjugation(CMat::zeros(0, 0)));
    }
    let nn = 2 * dp.dim();
    let sigma = AntiLinearMap::new(sigma_matrix(dp));
    let e = split_anti_involution(&sigma, &dp.n_plus, |_| rng.gaussian_vector(nn))?;
    Ok(ExtensionParameter::Conjugation(conjugation_from_split(dp, &sigma, &e)))
}

fn conjugation_from_split(dp: &DoubledProblem, sigma: &AntiLinearMap, e: &CMat) -> CMat {
    let se = sigma.apply_columns(e);
    let d_op = e * e.adjoint() - &se * se.adjoint();
    let p = dp.n_plus.projector();
    let j = d_op * sigma.matrix() * conj(&p);
    let q = dp.n_plus.basis();
    q.adjoint() * j * conj(q)
}

/// A random conjugation of `N₊` with no decoupling constraint.
pub fn generic_conjugation_parameter(dp: &DoubledProblem, rng: &mut Sampler) -> ExtensionParameter {
    let z = rng.unitary(dp.n_plus.dim());
    ExtensionParameter::Conjugation(&z * z.transpose())
}

/// The extension `graph(A) ⊕ L̃` with `L̃ ⊕ S̃L̃ = 𝔐`, built greedily from the
/// stored basis of `𝔐`; `swap` selects the companion `graph(A) ⊕ S̃L̃`.
pub fn canonical_extension(dp: &DoubledProblem, swap: bool) -> Result<ExtensionResult> {
    check_c_symmetric(dp)?;
    let tol = dp.a().tol();
    let pair = &dp.pair;
    let m_space = pair.b_star.graph().minus(pair.a.graph())?;
    let a_tilde = if m_space.is_zero() {
        pair.a.clone()
    } else {
        let s = AntiLinearMap::new(anti_involution_matrix(dp.c()));
        let l = split_anti_involution(&s, &m_space, |rest| rest.basis().column(0).into_owned())?;
        let l = if swap { s.apply_columns(&l) } else { l };
        let g = hstack(&[pair.a.graph().basis(), &l]);
        LinearRelation::from_graph(Subspace::span_columns(&g, tol))?
    };
    let p = recover_parameter(dp, &a_tilde)?;
    extension_from_parameter(dp, &p)
}

#[derive(Debug, Clone)]
pub struct BruteForce {
    pub hits: Vec<LinearRelation>,
    pub candidates: usize,
    pub structured: usize,
}

pub const BRUTE_FORCE_MAX_DIM: usize = 8;

const SWEEP_PHASES: [(f64, f64); 4] = [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)];

/// Samples `graph(A) ⊕ L` for half-dimensional `L ⊆ 𝔐` and keeps the
/// C-self-adjoint ones. The first candidates are a deterministic sweep over
/// projected coordinate vectors `w_a + ω w_b`, `ω ∈ {0, ±1, ±i}`; the rest
/// alternate between generic subspaces and greedy `S̃`-isotropic ones.
pub fn brute_force_extensions(dp: &DoubledProblem, budget: usize, seed: u64) -> Result<BruteForce> {
    check_c_symmetric(dp)?;
    let tol = dp.a().tol();
    let c = dp.c();
    let pair = &dp.pair;
    let m_space = pair.b_star.graph().minus(pair.a.graph())?;
    let m = m_space.dim();
    if m > BRUTE_FORCE_MAX_DIM {
        return Err(CsymError::input(format!(
            "brute force limited to dim 𝔐 <= {BRUTE_FORCE_MAX_DIM}, got {m}"
        )));
    }
    if m == 0 {
        let hits = if is_c_selfadjoint(&pair.a, c)? { vec![pair.a.clone()] } else { Vec::new() };
        return Ok(BruteForce { hits, candidates: 1, structured: 1 });
    }
    if m % 2 != 0 {
        return Err(CsymError::precondition("dim 𝔐 is odd"));
    }
    let half = m / 2;
    let nn = 2 * dp.dim();
    let s = AntiLinearMap::new(anti_involution_matrix(c));

    let proj = m_space.projector();
    let ws: Vec<CVec> = (0..nn)
        .map(|j| proj.column(j).into_owned())
        .filter(|w| w.norm() > tol.sqrt_eps())
        .collect();
    let mut seeds: Vec<CVec> = Vec::new();
    for a in 0..ws.len() {
        seeds.push(ws[a].clone());
        for b in 0..ws.len() {
            if a == b {
                continue;
            }
            for &(re, im) in &SWEEP_PHASES {
                seeds.push(&ws[a] + &ws[b] * C64::new(re, im));
            }
        }
    }
    seeds.truncate(budget);
    let structured = seeds.len();

    let complete = |first: &CVec, rng: Option<&mut Sampler>| -> Result<CMat> {
        let mut used_first = false;
        let mut rng = rng;
        split_anti_involution(&s, &m_space, |rest| {
            if !used_first {
                used_first = true;
                return first.clone();
            }
            match rng.as_deref_mut() {
                Some(r) => r.gaussian_vector(nn),
                None => ws
                    .iter()
                    .max_by(|x, y| rest.project(x).norm().total_cmp(&rest.project(y).norm()))
                    .cloned()
                    .unwrap_or_else(|| rest.basis().column(0).into_owned()),
            }
        })
    };

    let evaluate = |l: CMat| -> Result<Option<LinearRelation>> {
        let g = hstack(&[pair.a.graph().basis(), &l]);
        let cand = LinearRelation::from_graph(Subspace::span_columns(&g, tol))?;
        if cand.graph_dim() != pair.a.graph_dim() + half {
            return Ok(None);
        }
        Ok(if is_c_selfadjoint(&cand, c)? { Some(cand) } else { None })
    };

    let results: Vec<Result<Option<LinearRelation>>> = (0..budget)
        .into_par_iter()
        .map(|i| {
            if i < structured {
                return evaluate(complete(&seeds[i], None)?);
            }
            let mut rng = Sampler::new(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i as u64));
            if i % 2 == 0 {
                let coeffs = rng.gaussian_matrix(m, half);
                evaluate(m_space.basis() * coeffs)
            } else {
                let first = rng.gaussian_vector(nn);
                evaluate(complete(&first, Some(&mut rng))?)
            }
        })
        .collect();
    let mut hits = Vec::new();
    for r in results {
        if let Some(h) = r? {
            hits.push(h);
        }
    }
    Ok(BruteForce { hits, candidates: budget, structured })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CollisionReport {
    pub samples: usize,
    pub pairs: usize,
    pub collisions: usize,
}

/// Counts pairs of distinct admissible parameters with equal extensions.
pub fn parameter_collisions(dp: &DoubledProblem, samples: usize, seed: u64) -> Result<CollisionReport> {
    let tol = dp.a().tol();
    let mut rng = Sampler::new(seed);
    let mut built = Vec::with_capacity(samples);
    for _ in 0..samples {
        let p = admissible_parameter(dp, &mut rng)?;
        let r = extension_from_parameter(dp, &p)?;
        built.push((r.parameter, r.a_ext));
    }
    let mut pairs = 0;
    let mut collisions = 0;
    for i in 0..built.len() {
        for j in i + 1..built.len() {
            pairs += 1;
            let same_param = (&built[i].0 - &built[j].0).norm() <= tol.sqrt_eps();
            if !same_param && built[i].1.equals(&built[j].1)? {
                collisions += 1;
            }
        }
    }
    Ok(CollisionReport { samples, pairs, collisions })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::doubling::build_doubled;
    use crate::fixtures::{f_min, f_zero, random_csym};
    use crate::linalg::{Tolerance, ONE, ZERO};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn fmin_dp() -> DoubledProblem {
        let p = f_min(tol());
        build_doubled(&p.relation, &p.conjugation).unwrap()
    }

    fn diag(a: C64, b: C64) -> LinearRelation {
        let mut m = CMat::zeros(2, 2);
        m[(0, 0)] = a;
        m[(1, 1)] = b;
        LinearRelation::from_matrix(&m, tol()).unwrap()
    }

    #[test]
    fn fmin_round_trip_of_diag_one_three() {
        let dp = fmin_dp();
        let target = diag(ONE, C64::new(3.0, 0.0));
        let p = recover_parameter(&dp, &target).unwrap();
        let r = extension_from_parameter(&dp, &p).unwrap();
        assert!(r.a_ext.equals(&target).unwrap());
        assert!(r.checks.iter().all(Check::ok), "{:#?}", r.checks);
        assert!(r.diagnostics.is_operator);
        assert_eq!(r.l_a.dim(), 1);
        assert_eq!(r.l_astar.dim(), 1);
    }

    #[test]
    fn fmin_multivalued_member() {
        let dp = fmin_dp();
        let mut g = CMat::zeros(4, 2);
        g[(0, 0)] = ONE;
        g[(2, 0)] = ONE;
        g[(3, 1)] = ONE;
        let target = LinearRelation::from_graph(Subspace::span_columns(&g, tol())).unwrap();
        let p = recover_parameter(&dp, &target).unwrap();
        let r = extension_from_parameter(&dp, &p).unwrap();
        assert!(r.a_ext.equals(&target).unwrap());
        assert!(!r.diagnostics.is_operator);
        assert!(r.diagnostics.is_c_selfadjoint);
    }

    #[test]
    fn admissible_samples_are_sound_and_forms_agree() {
        let dp = build_doubled(&f_zero(tol()).relation, &f_zero(tol()).conjugation).unwrap();
        let mut rng = Sampler::new(5);
        for _ in 0..5 {
            let p = admissible_parameter(&dp, &mut rng).unwrap();
            let r = extension_from_parameter(&dp, &p).unwrap();
            assert!(r.checks.iter().all(Check::ok), "{:#?}", r.checks);
            for q in [p.to_unitary(&dp).unwrap(), p.to_onb(&dp).unwrap()] {
                let r2 = extension_from_parameter(&dp, &q).unwrap();
                assert!(r2.a_ext.distance(&r.a_ext).unwrap() < 1e-9, "{}", q.kind());
            }
        }
    }

    #[test]
    fn generic_conjugations_mostly_fail_to_decouple() {
        let dp = fmin_dp();
        let mut rng = Sampler::new(9);
        let mut failures = 0;
        for _ in 0..10 {
            let p = generic_conjugation_parameter(&dp, &mut rng);
            match extension_from_parameter(&dp, &p) {
                Err(CsymError::PropertyViolation { key, .. }) => {
                    assert_eq!(key, "extension.decoupling");
                    failures += 1;
                }
                Ok(r) => assert!(r.diagnostics.is_c_selfadjoint),
                Err(e) => panic!("{e}"),
            }
        }
        assert!(failures > 0);
    }

    #[test]
    fn operator_regime_has_unique_extension() {
        let p = random_csym(4, 2, tol()).unwrap();
        let dp = build_doubled(&p.relation, &p.conjugation).unwrap();
        assert_eq!(dp.n_plus.dim(), 0);
        let r = canonical_extension(&dp, false).unwrap();
        assert!(r.a_ext.equals(&p.relation).unwrap());
        let bf = brute_force_extensions(&dp, 10, 1).unwrap();
        assert_eq!(bf.hits.len(), 1);
        assert!(bf.hits[0].equals(&p.relation).unwrap());
    }

    #[test]
    fn canonical_and_swap_differ_on_fmin() {
        let dp = fmin_dp();
        let a = canonical_extension(&dp, false).unwrap();
        let b = canonical_extension(&dp, true).unwrap();
        assert!(a.diagnostics.is_c_selfadjoint && b.diagnostics.is_c_selfadjoint);
        assert!(!a.a_ext.equals(&b.a_ext).unwrap());
    }

    #[test]
    fn fmin_brute_force_finds_the_known_family() {
        let dp = fmin_dp();
        let bf = brute_force_extensions(&dp, 200, 3).unwrap();
        assert_eq!(bf.hits.len(), 200);
        for target in [diag(ONE, ZERO), diag(ONE, ONE), diag(ONE, I)] {
            assert!(bf.hits.iter().any(|h| h.equals(&target).unwrap()));
        }
        assert!(bf.hits.iter().any(|h| !h.is_operator()));
        let again = brute_force_extensions(&dp, 200, 3).unwrap();
        for (x, y) in bf.hits.iter().zip(&again.hits) {
            assert_eq!(x.graph().basis(), y.graph().basis());
        }
    }

    #[test]
    fn invalid_parameters_are_input_errors() {
        let dp = fmin_dp();
        let bad = ExtensionParameter::Conjugation(CMat::identity(3, 3));
        assert!(matches!(extension_from_parameter(&dp, &bad), Err(CsymError::Input(_))));
        let mut m = CMat::identity(2, 2);
        m[(0, 1)] = ONE;
        let bad = ExtensionParameter::Unitary(m);
        assert!(matches!(extension_from_parameter(&dp, &bad), Err(CsymError::Input(_))));
    }

    #[test]
    fn no_collisions_on_fmin() {
        let dp = fmin_dp();
        let r = parameter_collisions(&dp, 8, 4).unwrap();
        assert_eq!(r.pairs, 28);
        assert_eq!(r.collisions, 0);
    }
}
