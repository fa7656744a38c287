//! C-symmetry, the adjoint pair `(A, CAC)`, graph-level M-spaces and the
//! anti-involution they carry.

use crate::antilinear::{AntiLinearMap, Conjugation};
use crate::checks::Check;
use crate::error::{CsymError, Result};
use crate::linalg::{conj, inner, spectral_norm, CMat, CVec, Subspace, C64, ONE};
use crate::relations::{DomainOperator, LinearRelation, Regime};

/// `A`, `B = CAC` and both adjoints; `B* = C A* C`.
#[derive(Debug, Clone)]
pub struct AdjointPair {
    pub c: Conjugation,
    pub a: LinearRelation,
    pub b: LinearRelation,
    pub a_star: LinearRelation,
    pub b_star: LinearRelation,
}

impl AdjointPair {
    pub fn new(a: &LinearRelation, c: &Conjugation) -> Result<Self> {
        let b = a.conjugate(c)?;
        let a_star = a.adjoint();
        let b_star = a_star.conjugate(c)?;
        Ok(AdjointPair {
            c: c.clone(),
            a: a.clone(),
            b,
            a_star,
            b_star,
        })
    }

    pub fn regime(&self) -> Regime {
        self.a.regime()
    }

    /// `max(res(B ⊆ A*), res(A ⊆ B*))`.
    pub fn inclusion_residual(&self) -> Result<f64> {
        Ok(self
            .b
            .leq_residual(&self.a_star)?
            .max(self.a.leq_residual(&self.b_star)?))
    }
}

/// Residual of `CAC ⊆ A*`.
pub fn c_symmetry_residual(a: &LinearRelation, c: &Conjugation) -> Result<f64> {
    a.conjugate(c)?.leq_residual(&a.adjoint())
}

pub fn is_c_symmetric(a: &LinearRelation, c: &Conjugation) -> Result<bool> {
    Ok(c_symmetry_residual(a, c)? <= a.tol().eps)
}

/// `max |<A x_i, C x_j> - <x_i, C A x_j>|` over domain basis pairs.
pub fn weak_symmetry_residual(dop: &DomainOperator, c: &Conjugation) -> Result<f64> {
    let q = dop.domain().basis();
    if c.dim() != q.nrows() {
        return Err(CsymError::input("conjugation and operator dimensions differ"));
    }
    let aq = dop.images();
    let cq = c.apply_columns(q);
    let caq = c.apply_columns(aq);
    let mut worst: f64 = 0.0;
    for i in 0..q.ncols() {
        for j in 0..q.ncols() {
            let lhs = inner(&aq.column(i).into_owned(), &cq.column(j).into_owned());
            let rhs = inner(&q.column(i).into_owned(), &caq.column(j).into_owned());
            worst = worst.max((lhs - rhs).norm());
        }
    }
    Ok(worst)
}

/// Distance between `CAC` and `A*` (1.0 when the graph dimensions differ).
pub fn c_selfadjoint_residual(a: &LinearRelation, c: &Conjugation) -> Result<f64> {
    a.conjugate(c)?.distance(&a.adjoint())
}

pub fn is_c_selfadjoint(a: &LinearRelation, c: &Conjugation) -> Result<bool> {
    Ok(c_selfadjoint_residual(a, c)? <= a.tol().eps)
}

#[derive(Debug, Clone)]
pub struct DomainCriterion {
    /// `D(Ã*) = C D(Ã)`.
    pub criterion: bool,
    pub c_selfadjoint: bool,
    /// Whether `Ã ⊆ B*`, the setting in which the two sides must agree.
    pub within_b_star: bool,
    pub regime: Regime,
}

impl DomainCriterion {
    pub fn agree(&self) -> bool {
        self.criterion == self.c_selfadjoint
    }
}

pub fn domain_criterion_report(
    a_tilde: &LinearRelation,
    a: &LinearRelation,
    c: &Conjugation,
) -> Result<DomainCriterion> {
    if !a.leq(a_tilde)? {
        return Err(CsymError::precondition("A is not contained in the candidate extension"));
    }
    let lhs = a_tilde.adjoint().domain();
    let rhs = a_tilde.domain().anti_image(c.matrix())?;
    let criterion = lhs.equals(&rhs)?;
    let c_selfadjoint = is_c_selfadjoint(a_tilde, c)?;
    let b_star = a.adjoint().conjugate(c)?;
    Ok(DomainCriterion {
        criterion,
        c_selfadjoint,
        within_b_star: a_tilde.leq(&b_star)?,
        regime: a_tilde.regime(),
    })
}

pub fn domain_criterion(a_tilde: &LinearRelation, a: &LinearRelation, c: &Conjugation) -> Result<bool> {
    Ok(domain_criterion_report(a_tilde, a, c)?.criterion)
}

/// `C ⊕ C` as an anti-linear map on `H ⊕ H`.
pub fn doubled_conjugation_matrix(c: &Conjugation) -> CMat {
    let n = c.dim();
    let k = c.matrix();
    let mut m = CMat::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(k);
    m.view_mut((n, n), (n, n)).copy_from(k);
    m
}

/// `S(f, g) = (Cg, -Cf)`, the graph-level form of `A*C` on `graph(B*) ⊖ graph(A)`.
pub fn anti_involution_matrix(c: &Conjugation) -> CMat {
    let n = c.dim();
    let k = c.matrix();
    let mut m = CMat::zeros(2 * n, 2 * n);
    m.view_mut((0, n), (n, n)).copy_from(k);
    m.view_mut((n, 0), (n, n)).copy_from(&(-k));
    m
}

#[derive(Debug, Clone)]
pub struct MSpaces {
    /// `graph(B*) ⊖ graph(A)`.
    pub graph_m: Subspace,
    /// `graph(A*) ⊖ graph(B)`.
    pub graph_m_prime: Subspace,
    /// `N(I + A* C A* C)` computed through relation composition.
    pub m_bstar: Subspace,
    /// `N(I + C A* C A*)`.
    pub m_astar: Subspace,
    pub regime: Regime,
    pub checks: Vec<Check>,
}

pub fn m_spaces(pair: &AdjointPair) -> Result<MSpaces> {
    let tol = pair.a.tol();
    let n = pair.a.dim();
    let sym = pair.b.leq_residual(&pair.a_star)?;
    if sym > tol.eps {
        return Err(CsymError::precondition(format!(
            "A is not C-symmetric (residual {sym:.3e})"
        )));
    }
    let graph_m = pair.b_star.graph().minus(pair.a.graph())?;
    let graph_m_prime = pair.a_star.graph().minus(pair.b.graph())?;
    let m_bstar = pair
        .a_star
        .compose(&pair.b_star)?
        .scalar_shift(ONE)
        .kernel();
    let m_astar = pair
        .b_star
        .compose(&pair.a_star)?
        .scalar_shift(ONE)
        .kernel();
    let regime = pair.regime();
    let mut checks = Vec::new();

    let cc = doubled_conjugation_matrix(&pair.c);
    let image = graph_m.anti_image(&cc)?;
    checks.push(Check::residual(
        "m_spaces.conjugation_maps_m_onto_m_prime",
        image.distance(&graph_m_prime)?,
        tol.eps,
    ));
    checks.push(Check::residual(
        "m_spaces.orthogonal_to_graph_a",
        graph_m.orthogonality_residual(pair.a.graph())?,
        tol.eps,
    ));
    checks.push(Check::flag(
        "m_spaces.dimension",
        graph_m.dim() + pair.a.graph_dim() == pair.b_star.graph_dim(),
    ));

    let first = graph_m.coordinate_projection(0, n);
    let kernel_vs_graph = Check::residual(
        "m_spaces.kernel_matches_graph_complement",
        first.distance(&m_bstar)?,
        tol.eps,
    );
    let c_image = m_bstar.anti_image(pair.c.matrix())?;
    let c_maps = Check::residual(
        "m_spaces.c_maps_m_bstar_onto_m_astar",
        c_image.distance(&m_astar)?,
        tol.eps,
    );
    match regime {
        Regime::Operator => {
            checks.push(kernel_vs_graph);
            checks.push(c_maps);
            let b_image = if m_bstar.is_zero() {
                Subspace::zero(n, tol)
            } else {
                let bs = pair.b_star.to_matrix()?;
                m_bstar.image(&bs)?
            };
            checks.push(Check::residual(
                "m_spaces.b_star_maps_m_bstar_onto_m_astar",
                b_image.distance(&m_astar)?,
                tol.eps,
            ));
        }
        Regime::Relation => {
            checks.push(kernel_vs_graph.report_only());
            checks.push(c_maps.report_only());
        }
    }
    Ok(MSpaces {
        graph_m,
        graph_m_prime,
        m_bstar,
        m_astar,
        regime,
        checks,
    })
}

/// `<f, g> + <Tf, Tg>`.
pub fn graph_inner(t: &LinearRelation, f: &CVec, g: &CVec) -> Result<C64> {
    let tf = t.apply(f)?;
    let tg = t.apply(g)?;
    Ok(inner(f, g) + inner(&tf, &tg))
}

#[derive(Debug, Clone)]
pub struct AntiInvolution {
    pub map: AntiLinearMap,
    pub space: Subspace,
    /// `||(I - P) S Q||` for an orthonormal basis `Q` of the M-space.
    pub leak: f64,
    /// `||S^2 Q + Q||`.
    pub square: f64,
    /// `max |<S q_i, S q_j> - <q_j, q_i>|`.
    pub anti_unitarity: f64,
}

/// The anti-involution on the graph-level M-space `graph(B*) ⊖ graph(A)`.
pub fn anti_involution(pair: &AdjointPair) -> Result<AntiInvolution> {
    let ms = m_spaces(pair)?;
    anti_involution_on(&pair.c, ms.graph_m)
}

pub fn anti_involution_on(c: &Conjugation, space: Subspace) -> Result<AntiInvolution> {
    let tol = space.tol();
    let map = AntiLinearMap::new(anti_involution_matrix(c));
    let q = space.basis();
    let (leak, square, anti_unitarity) = if q.ncols() == 0 {
        (0.0, 0.0, 0.0)
    } else {
        let sq = map.apply_columns(q);
        let leak = spectral_norm(&(&sq - space.projector() * &sq));
        let square = spectral_norm(&(map.apply_columns(&sq) + q));
        let g1 = sq.adjoint() * &sq;
        let g2 = q.adjoint() * q;
        let anti = (g1 - g2.transpose()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        (leak, square, anti)
    };
    if leak > tol.eps || square > tol.eps {
        return Err(CsymError::violation(
            "anti_involution.square",
            "S does not act as an anti-involution on the M-space",
            leak.max(square),
        ));
    }
    Ok(AntiInvolution {
        map,
        space,
        leak,
        square,
        anti_unitarity,
    })
}

/// Image of a subspace of `H ⊕ H` under `C ⊕ C`.
pub fn conjugate_graph(c: &Conjugation, s: &Subspace) -> Result<Subspace> {
    s.anti_image(&doubled_conjugation_matrix(c))
}

/// Matrix of the linear operator `CAC` for a matrix `A`.
pub fn conjugated_matrix(c: &Conjugation, a: &CMat) -> CMat {
    c.matrix() * conj(a) * conj(c.matrix())
}
