//! The doubled operator `𝔄 = [[0, A], [CAC, 0]]` on `H ⊕ H`, the conjugation
//! `𝔈(x, y) = (Cy, Cx)`, deficiency spaces and the decompositions built on them.

use crate::antilinear::Conjugation;
use crate::checks::Check;
use crate::csym::{is_c_selfadjoint, AdjointPair};
use crate::error::{CsymError, Result};
use crate::linalg::{hstack, vstack, CMat, Subspace, I, ONE};
use crate::relations::{LinearRelation, Regime};

/// `{((x, y), (p, q)) : (y, p) ∈ top, (x, q) ∈ bottom}`, i.e. the relation
/// with block matrix `[[0, top], [bottom, 0]]`.
pub fn block_antidiag(top: &LinearRelation, bottom: &LinearRelation) -> Result<LinearRelation> {
    let n = top.dim();
    if bottom.dim() != n {
        return Err(CsymError::input("blocks act on different spaces"));
    }
    let gt = top.graph().basis();
    let gb = bottom.graph().basis();
    let zt = CMat::zeros(n, gt.ncols());
    let zb = CMat::zeros(n, gb.ncols());
    let t_arg = gt.rows(0, n).into_owned();
    let t_val = gt.rows(n, n).into_owned();
    let b_arg = gb.rows(0, n).into_owned();
    let b_val = gb.rows(n, n).into_owned();
    let from_top = vstack(&[&zt, &t_arg, &t_val, &zt]);
    let from_bottom = vstack(&[&b_arg, &zb, &zb, &b_val]);
    let g = hstack(&[&from_top, &from_bottom]);
    LinearRelation::from_graph(Subspace::span_columns(&g, top.tol()))
}

/// Recovers `(top, bottom)` from a relation on `H ⊕ H` by intersecting with
/// the two coordinate patterns of [`block_antidiag`].
pub fn antidiag_blocks(r: &LinearRelation) -> Result<(LinearRelation, LinearRelation)> {
    let m = r.dim();
    if m % 2 != 0 {
        return Err(CsymError::input("relation does not act on a doubled space"));
    }
    let n = m / 2;
    let tol = r.tol();
    let id = CMat::identity(n, n);
    let z = CMat::zeros(n, n);
    // ((0, y), (p, 0))
    let pat_top = Subspace::span_columns(
        &hstack(&[&vstack(&[&z, &id, &z, &z]), &vstack(&[&z, &z, &id, &z])]),
        tol,
    );
    // ((x, 0), (0, q))
    let pat_bottom = Subspace::span_columns(
        &hstack(&[&vstack(&[&id, &z, &z, &z]), &vstack(&[&z, &z, &z, &id])]),
        tol,
    );
    let top = r.graph().intersect(&pat_top)?;
    let bottom = r.graph().intersect(&pat_bottom)?;
    let tb = top.basis();
    let bb = bottom.basis();
    let top_graph = vstack(&[&tb.rows(n, n).into_owned(), &tb.rows(2 * n, n).into_owned()]);
    let bottom_graph = vstack(&[&bb.rows(0, n).into_owned(), &bb.rows(3 * n, n).into_owned()]);
    Ok((
        LinearRelation::from_graph(Subspace::span_columns(&top_graph, tol))?,
        LinearRelation::from_graph(Subspace::span_columns(&bottom_graph, tol))?,
    ))
}

/// Matrix `[[0, K], [K, 0]]` of `𝔈`.
pub fn frak_c_matrix(c: &Conjugation) -> CMat {
    let n = c.dim();
    let k = c.matrix();
    let mut m = CMat::zeros(2 * n, 2 * n);
    m.view_mut((0, n), (n, n)).copy_from(k);
    m.view_mut((n, 0), (n, n)).copy_from(k);
    m
}

/// `Q = diag(I, -I)`.
pub fn parity_matrix(n: usize) -> CMat {
    let mut q = CMat::identity(2 * n, 2 * n);
    for j in n..2 * n {
        q[(j, j)] = -ONE;
    }
    q
}

#[derive(Debug, Clone)]
pub struct DoubledProblem {
    pub pair: AdjointPair,
    pub frak_a: LinearRelation,
    pub frak_a_star: LinearRelation,
    pub frak_c: Conjugation,
    pub n_plus: Subspace,
    pub n_minus: Subspace,
    pub checks: Vec<Check>,
}

impl DoubledProblem {
    pub fn a(&self) -> &LinearRelation {
        &self.pair.a
    }

    pub fn c(&self) -> &Conjugation {
        &self.pair.c
    }

    pub fn dim(&self) -> usize {
        self.pair.a.dim()
    }

    pub fn regime(&self) -> Regime {
        self.pair.regime()
    }

    /// `dim graph(B*) - dim graph(A)`.
    pub fn defect(&self) -> usize {
        self.pair.b_star.graph_dim().saturating_sub(self.pair.a.graph_dim())
    }
}

pub fn build_doubled(a: &LinearRelation, c: &Conjugation) -> Result<DoubledProblem> {
    let tol = a.tol();
    let pair = AdjointPair::new(a, c)?;
    let frak_a = block_antidiag(&pair.a, &pair.b)?;
    let frak_a_star = frak_a.adjoint();
    let frak_c = Conjugation::new(frak_c_matrix(c), tol)?;
    let n_plus = frak_a_star.eigenspace(I);
    let n_minus = frak_a_star.eigenspace(-I);

    let mut checks = Vec::new();
    let from_blocks = block_antidiag(&pair.b_star, &pair.a_star)?;
    checks.push(Check::residual(
        "doubling.adjoint_block_form",
        frak_a_star.distance(&from_blocks)?,
        tol.eps,
    ));
    let fc = frak_c.matrix();
    let ee = crate::csym::doubled_conjugation_matrix(&frak_c);
    let conj_graph = frak_a.graph().anti_image(&ee)?;
    checks.push(Check::residual(
        "doubling.frak_c_commutes_with_frak_a",
        conj_graph.distance(frak_a.graph())?,
        tol.eps,
    ));
    let unitary = crate::linalg::spectral_norm(&(fc.adjoint() * fc - CMat::identity(fc.nrows(), fc.ncols())));
    checks.push(Check::residual("doubling.frak_c_is_conjugation", unitary, tol.eps));
    Ok(DoubledProblem {
        pair,
        frak_a,
        frak_a_star,
        frak_c,
        n_plus,
        n_minus,
        checks,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct SymmetryEquivalence {
    pub c_symmetric: bool,
    pub frak_symmetric: bool,
    pub c_selfadjoint: bool,
    pub frak_selfadjoint: bool,
}

impl SymmetryEquivalence {
    pub fn holds(&self) -> bool {
        self.c_symmetric == self.frak_symmetric && self.c_selfadjoint == self.frak_selfadjoint
    }
}

pub fn verify_symmetry_equivalence(dp: &DoubledProblem) -> Result<SymmetryEquivalence> {
    let eps = dp.a().tol().eps;
    let c_symmetric = dp.pair.b.leq_residual(&dp.pair.a_star)? <= eps;
    let c_selfadjoint = is_c_selfadjoint(dp.a(), dp.c())?;
    let frak_symmetric = dp.frak_a.leq_residual(&dp.frak_a_star)? <= eps;
    let frak_selfadjoint = dp.frak_a.distance(&dp.frak_a_star)? <= eps;
    Ok(SymmetryEquivalence {
        c_symmetric,
        frak_symmetric,
        c_selfadjoint,
        frak_selfadjoint,
    })
}

fn require_c_symmetric(dp: &DoubledProblem) -> Result<()> {
    let r = dp.pair.b.leq_residual(&dp.pair.a_star)?;
    if r > dp.a().tol().eps {
        return Err(CsymError::precondition(format!(
            "A is not C-symmetric (residual {r:.3e})"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct Deficiency {
    pub n_plus: Subspace,
    pub n_minus: Subspace,
    pub checks: Vec<Check>,
}

pub fn deficiency(dp: &DoubledProblem) -> Result<Deficiency> {
    require_c_symmetric(dp)?;
    let tol = dp.a().tol();
    let n = dp.dim();
    let np = dp.n_plus.clone();
    let nm = dp.n_minus.clone();
    let mut checks = Vec::new();
    let image = np.anti_image(dp.frak_c.matrix())?;
    checks.push(Check::residual(
        "deficiency.frak_c_maps_n_plus_onto_n_minus",
        image.distance(&nm)?,
        tol.eps,
    ));
    checks.push(Check::flag("deficiency.equal_dimensions", np.dim() == nm.dim()));

    // (x, y) ∈ N+  <=>  (y, i x) ∈ C A* C  and  (x, i y) ∈ A*.
    let mut worst: f64 = 0.0;
    let q = np.basis();
    for j in 0..q.ncols() {
        let x = q.column(j).rows(0, n).into_owned();
        let y = q.column(j).rows(n, n).into_owned();
        worst = worst.max(dp.pair.b_star.pair_residual(&y, &(&x * I)));
        worst = worst.max(dp.pair.a_star.pair_residual(&x, &(&y * I)));
    }
    checks.push(Check::residual("deficiency.componentwise", worst, tol.eps));
    Ok(Deficiency {
        n_plus: np,
        n_minus: nm,
        checks,
    })
}

/// `graph(T*) = graph(T) ⊕ 𝔑` with `𝔑 = {(u, v) ∈ T* : (v, -u) ∈ T*}`
/// and `𝔑 = {(w, iw)} ∔ {(w, -iw)}`.
#[derive(Debug, Clone)]
pub struct VnDecomposition {
    pub regime: Regime,
    pub n_plus: Subspace,
    pub n_minus: Subspace,
    /// `𝔑` as a subspace of `H ⊕ H`.
    pub graph_n: Subspace,
    /// `N((T*)^2 + I)` through relation composition.
    pub kernel: Subspace,
    pub checks: Vec<Check>,
}

pub fn vn_decomposition(t: &LinearRelation) -> Result<VnDecomposition> {
    let tol = t.tol();
    let n = t.dim();
    let ts = t.adjoint();
    let sym = t.leq_residual(&ts)?;
    if sym > tol.eps {
        return Err(CsymError::precondition(format!(
            "T is not symmetric (residual {sym:.3e})"
        )));
    }
    let regime = if ts.is_operator() { Regime::Operator } else { Regime::Relation };
    let n_plus = ts.eigenspace(I);
    let n_minus = ts.eigenspace(-I);

    let g = ts.graph().basis();
    let u = g.rows(0, n).into_owned();
    let v = g.rows(n, n).into_owned();
    let rotated = Subspace::span_columns(&vstack(&[&(-&v), &u]), tol);
    let graph_n = ts.graph().intersect(&rotated)?;
    let kernel = ts.compose(&ts)?.scalar_shift(ONE).kernel();

    let mut checks = Vec::new();
    checks.push(Check::residual(
        "vn.graph_orthogonal",
        t.graph().orthogonality_residual(&graph_n)?,
        tol.eps,
    ));
    let sum = t.graph().sum(&graph_n)?;
    checks.push(Check::residual("vn.sum_is_adjoint_graph", sum.distance(ts.graph())?, tol.eps));
    checks.push(Check::flag(
        "vn.dimensions_additive",
        t.graph_dim() + graph_n.dim() == ts.graph_dim(),
    ));
    let gp = graph_of_scalar(&n_plus, I);
    let gm = graph_of_scalar(&n_minus, -I);
    let pm = gp.sum(&gm)?;
    checks.push(Check::flag(
        "vn.deficiency_direct_sum",
        pm.dim() == gp.dim() + gm.dim() && pm.equals(&graph_n)?,
    ));
    let first = graph_n.coordinate_projection(0, n);
    let kernel_check = Check::residual("vn.kernel_is_first_component", first.distance(&kernel)?, tol.eps);
    let indep = n_plus.sum(&n_minus)?;
    let indep_check = Check::flag(
        "vn.kernel_direct_sum",
        indep.dim() == n_plus.dim() + n_minus.dim() && indep.equals(&kernel)?,
    );
    match regime {
        Regime::Operator => {
            checks.push(kernel_check);
            checks.push(indep_check);
        }
        Regime::Relation => {
            checks.push(kernel_check.report_only());
            checks.push(indep_check.report_only());
        }
    }
    Ok(VnDecomposition {
        regime,
        n_plus,
        n_minus,
        graph_n,
        kernel,
        checks,
    })
}

/// `{(w, λ w) : w ∈ s}`.
fn graph_of_scalar(s: &Subspace, lambda: crate::linalg::C64) -> Subspace {
    let q = s.basis();
    Subspace::span_columns(&vstack(&[q, &(q * lambda)]), s.tol())
}

/// The operator-form statements: domain decompositions, the C-mapping of the
/// kernels and the factor-two dimension identity.
#[derive(Debug, Clone)]
pub struct RaceVerbatim {
    /// `N(A* C A* C + I)`.
    pub kernel: Subspace,
    /// `N(C A* C A* + I)`.
    pub kernel_c: Subspace,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone)]
pub struct RaceDecomposition {
    pub regime: Regime,
    pub verbatim: Option<RaceVerbatim>,
    pub refusal: Option<String>,
    /// `graph(B*) ⊖ graph(A)`.
    pub graph_m: Subspace,
    pub c_selfadjoint: bool,
    /// The corollary's prediction: the relevant kernel is trivial.
    pub corollary_predicts_selfadjoint: bool,
    pub checks: Vec<Check>,
}

impl RaceDecomposition {
    pub fn corollary_agrees(&self) -> bool {
        self.c_selfadjoint == self.corollary_predicts_selfadjoint
    }
}

/// Graph-norm orthogonal decomposition `D(CA*C) = D(A) ⊕ N(A*CA*C + I)` and
/// its companion. Refuses outside the operator regime.
pub fn race_verbatim(a: &LinearRelation, c: &Conjugation) -> Result<RaceVerbatim> {
    let pair = AdjointPair::new(a, c)?;
    let tol = a.tol();
    if !(pair.a_star.is_operator() && pair.b_star.is_operator() && a.is_operator()) {
        return Err(CsymError::precondition(format!(
            "operator-form decomposition needs single-valued A, A* and CA*C (regime: {})",
            a.regime().as_str()
        )));
    }
    let r = pair.b.leq_residual(&pair.a_star)?;
    if r > tol.eps {
        return Err(CsymError::precondition(format!("A is not C-symmetric (residual {r:.3e})")));
    }
    let kernel = pair.a_star.compose(&pair.b_star)?.scalar_shift(ONE).kernel();
    let kernel_c = pair.b_star.compose(&pair.a_star)?.scalar_shift(ONE).kernel();
    let mut checks = Vec::new();

    checks.push(graph_orthogonal_split(
        "race.domain_b_star",
        &pair.b_star,
        &a.domain(),
        &kernel,
    )?);
    checks.push(graph_orthogonal_split(
        "race.domain_a_star",
        &pair.a_star,
        &pair.b.domain(),
        &kernel_c,
    )?);
    let image = kernel.anti_image(c.matrix())?;
    checks.push(Check::residual("race.c_maps_kernels", image.distance(&kernel_c)?, tol.eps));
    let dp = build_doubled(a, c)?;
    checks.push(Check::flag(
        "race.dimension_identity",
        kernel.dim() == 2 * dp.n_plus.dim(),
    ));
    Ok(RaceVerbatim {
        kernel,
        kernel_c,
        checks,
    })
}

/// Checks `D(T) = d ⊕ k` with orthogonality in the graph inner product of `T`.
fn graph_orthogonal_split(key: &str, t: &LinearRelation, d: &Subspace, k: &Subspace) -> Result<Check> {
    let tol = t.tol();
    let tm = t.to_matrix()?;
    let lift = |s: &Subspace| vstack(&[s.basis(), &(&tm * s.basis())]);
    let ld = lift(d);
    let lk = lift(k);
    let orth = if ld.ncols() == 0 || lk.ncols() == 0 {
        0.0
    } else {
        crate::linalg::spectral_norm(&(ld.adjoint() * &lk))
    };
    let sum = d.sum(k)?;
    let span = sum.distance(&t.domain())?;
    let dims = d.dim() + k.dim() == t.domain().dim();
    let residual = if dims { orth.max(span) } else { 1.0 };
    Ok(Check::residual(key, residual, tol.eps))
}

pub fn race_decomposition(a: &LinearRelation, c: &Conjugation) -> Result<RaceDecomposition> {
    let tol = a.tol();
    let pair = AdjointPair::new(a, c)?;
    let r = pair.b.leq_residual(&pair.a_star)?;
    if r > tol.eps {
        return Err(CsymError::precondition(format!("A is not C-symmetric (residual {r:.3e})")));
    }
    let regime = a.regime();
    let graph_m = pair.b_star.graph().minus(a.graph())?;
    let c_selfadjoint = is_c_selfadjoint(a, c)?;
    let mut checks = Vec::new();
    let (verbatim, refusal) = match race_verbatim(a, c) {
        Ok(v) => (Some(v), None),
        Err(CsymError::Precondition(msg)) => (None, Some(msg)),
        Err(e) => return Err(e),
    };
    let corollary_predicts_selfadjoint = match &verbatim {
        Some(v) => {
            checks.extend(v.checks.iter().cloned());
            v.kernel.is_zero()
        }
        None => {
            checks.push(Check::flag(
                "race.surrogate_dimension",
                graph_m.dim() + a.graph_dim() == pair.b_star.graph_dim(),
            ));
            // The relation-level kernel and its dimension identity are only recorded.
            let kernel = pair.a_star.compose(&pair.b_star)?.scalar_shift(ONE).kernel();
            let dp = build_doubled(a, c)?;
            checks.push(
                Check::flag("race.dimension_identity", kernel.dim() == 2 * dp.n_plus.dim())
                    .report_only()
                    .with_note(format!(
                        "dim N = {}, dim N+ = {}",
                        kernel.dim(),
                        dp.n_plus.dim()
                    )),
            );
            checks.push(
                Check::flag("race.relation_kernel_corollary", kernel.is_zero() == c_selfadjoint)
                    .report_only(),
            );
            graph_m.is_zero()
        }
    };
    checks.push(Check::flag(
        "race.corollary",
        corollary_predicts_selfadjoint == c_selfadjoint,
    ));
    Ok(RaceDecomposition {
        regime,
        verbatim,
        refusal,
        graph_m,
        c_selfadjoint,
        corollary_predicts_selfadjoint,
        checks,
    })
}
