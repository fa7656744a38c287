//! Linear relations on `H = C^n`, i.e. subspaces of `H ⊕ H`.
//!
//! The first `n` coordinates of a graph vector are the argument, the last `n`
//! the value. All operations are exact subspace algebra on graphs; nothing
//! goes through pseudo-inverses.

use crate::antilinear::Conjugation;
use crate::error::{CsymError, Result};
use crate::linalg::{conj, hstack, vstack, CMat, CVec, Subspace, Tolerance, C64};

/// Everywhere defined single-valued inputs versus genuine relations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Operator,
    Relation,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Operator => "operator",
            Regime::Relation => "relation",
        }
    }
}

#[derive(Debug, Clone)]
pub struct LinearRelation {
    n: usize,
    graph: Subspace,
}

/// A partially defined operator: an orthonormal domain basis and the images
/// of its columns.
#[derive(Debug, Clone)]
pub struct DomainOperator {
    domain: Subspace,
    images: CMat,
}

impl DomainOperator {
    pub fn new(domain: Subspace, images: CMat) -> Result<Self> {
        if images.nrows() != domain.ambient() || images.ncols() != domain.dim() {
            return Err(CsymError::input(format!(
                "images must be {}x{}, got {}x{}",
                domain.ambient(),
                domain.dim(),
                images.nrows(),
                images.ncols()
            )));
        }
        Ok(DomainOperator { domain, images })
    }

    /// `L` restricted to `domain`.
    pub fn restriction(l: &CMat, domain: Subspace) -> Result<Self> {
        if l.ncols() != domain.ambient() || l.nrows() != domain.ambient() {
            return Err(CsymError::input("matrix and domain dimensions differ"));
        }
        let images = l * domain.basis();
        DomainOperator::new(domain, images)
    }

    pub fn domain(&self) -> &Subspace {
        &self.domain
    }

    pub fn images(&self) -> &CMat {
        &self.images
    }

    pub fn to_relation(&self) -> LinearRelation {
        from_operator(self)
    }
}

pub fn from_operator(dop: &DomainOperator) -> LinearRelation {
    let g = vstack(&[dop.domain.basis(), &dop.images]);
    LinearRelation {
        n: dop.domain.ambient(),
        graph: Subspace::span_columns(&g, dop.domain.tol()),
    }
}

impl LinearRelation {
    pub fn from_graph(graph: Subspace) -> Result<Self> {
        if graph.ambient() % 2 != 0 {
            return Err(CsymError::input("graph must live in an even-dimensional space"));
        }
        Ok(LinearRelation {
            n: graph.ambient() / 2,
            graph,
        })
    }

    /// Span of the pairs `(xs_j, ys_j)`.
    pub fn from_pairs(xs: &CMat, ys: &CMat, tol: Tolerance) -> Result<Self> {
        if xs.shape() != ys.shape() {
            return Err(CsymError::input("argument and value blocks differ in shape"));
        }
        let n = xs.nrows();
        Ok(LinearRelation {
            n,
            graph: Subspace::span_columns(&vstack(&[xs, ys]), tol),
        })
    }

    /// Graph of an everywhere defined matrix operator.
    pub fn from_matrix(a: &CMat, tol: Tolerance) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(CsymError::input("operator matrix must be square"));
        }
        let n = a.nrows();
        LinearRelation::from_pairs(&CMat::identity(n, n), a, tol)
    }

    pub fn zero_relation(n: usize, tol: Tolerance) -> Self {
        LinearRelation {
            n,
            graph: Subspace::zero(2 * n, tol),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn graph(&self) -> &Subspace {
        &self.graph
    }

    pub fn graph_dim(&self) -> usize {
        self.graph.dim()
    }

    pub fn tol(&self) -> Tolerance {
        self.graph.tol()
    }

    fn check(&self, other: &LinearRelation) -> Result<()> {
        if self.n != other.n {
            return Err(CsymError::input(format!(
                "relations act on C^{} and C^{}",
                self.n, other.n
            )));
        }
        Ok(())
    }

    fn arg_block(&self) -> CMat {
        self.graph.basis().rows(0, self.n).into_owned()
    }

    fn value_block(&self) -> CMat {
        self.graph.basis().rows(self.n, self.n).into_owned()
    }

    /// `{(y, -x) : (x, y) ∈ R}⊥`.
    pub fn adjoint(&self) -> LinearRelation {
        let rotated = vstack(&[&self.value_block(), &(-self.arg_block())]);
        let rotated = Subspace::span_columns(&rotated, self.tol());
        LinearRelation {
            n: self.n,
            graph: rotated.complement(),
        }
    }

    /// `R⁻¹ = {(y, x) : (x, y) ∈ R}`.
    pub fn inverse(&self) -> LinearRelation {
        let g = vstack(&[&self.value_block(), &self.arg_block()]);
        LinearRelation {
            n: self.n,
            graph: Subspace::span_columns(&g, self.tol()),
        }
    }

    pub fn domain(&self) -> Subspace {
        self.graph.coordinate_projection(0, self.n)
    }

    pub fn range(&self) -> Subspace {
        self.graph.coordinate_projection(self.n, self.n)
    }

    /// `{x : (x, 0) ∈ R}`.
    pub fn kernel(&self) -> Subspace {
        let n = self.n;
        let tol = self.tol();
        let axis = Subspace::span_columns(&vstack(&[&CMat::identity(n, n), &CMat::zeros(n, n)]), tol);
        let cap = self.graph.intersect(&axis).expect("same ambient");
        cap.coordinate_projection(0, n)
    }

    /// `{y : (0, y) ∈ R}`.
    pub fn multivalued_part(&self) -> Subspace {
        let n = self.n;
        let tol = self.tol();
        let axis = Subspace::span_columns(&vstack(&[&CMat::zeros(n, n), &CMat::identity(n, n)]), tol);
        let cap = self.graph.intersect(&axis).expect("same ambient");
        cap.coordinate_projection(n, n)
    }

    pub fn is_operator(&self) -> bool {
        self.multivalued_part().is_zero()
    }

    pub fn is_everywhere_defined(&self) -> bool {
        self.domain().dim() == self.n
    }

    /// Everywhere defined and single valued.
    pub fn is_matrix(&self) -> bool {
        self.is_operator() && self.is_everywhere_defined()
    }

    pub fn regime(&self) -> Regime {
        if self.is_matrix() {
            Regime::Operator
        } else {
            Regime::Relation
        }
    }

    /// Matrix of an everywhere defined operator.
    pub fn to_matrix(&self) -> Result<CMat> {
        if !self.is_matrix() {
            return Err(CsymError::precondition(
                "relation is not an everywhere defined operator",
            ));
        }
        let x = self.arg_block();
        let y = self.value_block();
        let inv = x
            .try_inverse()
            .ok_or_else(|| CsymError::precondition("argument block is singular"))?;
        Ok(y * inv)
    }

    /// Solves for `y` with `(x, y) ∈ R`; fails if `x ∉ domain(R)` or `R` is
    /// multivalued.
    pub fn apply(&self, x: &CVec) -> Result<CVec> {
        if x.len() != self.n {
            return Err(CsymError::input("vector dimension mismatch"));
        }
        if !self.is_operator() {
            return Err(CsymError::precondition("relation is multivalued"));
        }
        let xb = self.arg_block();
        let svd = crate::linalg::svd_sorted(&xb);
        let smax = svd.sigma.first().copied().unwrap_or(0.0);
        let tol = self.tol();
        let mut coeff = CVec::zeros(xb.ncols());
        let ut_x = svd.u.adjoint() * x;
        for (k, &s) in svd.sigma.iter().enumerate() {
            if !tol.is_negligible(s, smax) {
                let scale = ut_x[k] / C64::new(s, 0.0);
                coeff += svd.v.column(k) * scale;
            }
        }
        let resid = (&xb * &coeff - x).norm() / x.norm().max(1.0);
        if resid > tol.eps.sqrt() {
            return Err(CsymError::precondition(format!(
                "vector is not in the domain (residual {resid:.3e})"
            )));
        }
        Ok(self.value_block() * coeff)
    }

    /// `R2 ∘ R1 = {(x, z) : ∃y, (x, y) ∈ R1, (y, z) ∈ R2}` (self is `R2`).
    pub fn compose(&self, r1: &LinearRelation) -> Result<LinearRelation> {
        self.check(r1)?;
        let n = self.n;
        let tol = self.tol();
        let z = |r: usize, c: usize| CMat::zeros(r, c);
        let id = CMat::identity(n, n);
        // {(x, y, z) : (x, y) ∈ R1}
        let g1 = r1.graph.basis();
        let s1 = hstack(&[
            &vstack(&[&g1.rows(0, n).into_owned(), &g1.rows(n, n).into_owned(), &z(n, g1.ncols())]),
            &vstack(&[&z(n, n), &z(n, n), &id]),
        ]);
        // {(x, y, z) : (y, z) ∈ R2}
        let g2 = self.graph.basis();
        let s2 = hstack(&[
            &vstack(&[&z(n, g2.ncols()), &g2.rows(0, n).into_owned(), &g2.rows(n, n).into_owned()]),
            &vstack(&[&id, &z(n, n), &z(n, n)]),
        ]);
        let s1 = Subspace::span_columns(&s1, tol);
        let s2 = Subspace::span_columns(&s2, tol);
        let cap = s1.intersect(&s2)?;
        let b = cap.basis();
        let xz = vstack(&[&b.rows(0, n).into_owned(), &b.rows(2 * n, n).into_owned()]);
        Ok(LinearRelation {
            n,
            graph: Subspace::span_columns(&xz, tol),
        })
    }

    /// `R + λ I = {(x, y + λ x)}`.
    pub fn scalar_shift(&self, lambda: C64) -> LinearRelation {
        let x = self.arg_block();
        let y = self.value_block() + &x * lambda;
        LinearRelation {
            n: self.n,
            graph: Subspace::span_columns(&vstack(&[&x, &y]), self.tol()),
        }
    }

    /// `{(x, y + z) : (x, y) ∈ R, (x, z) ∈ S}`.
    pub fn operator_sum(&self, other: &LinearRelation) -> Result<LinearRelation> {
        self.check(other)?;
        // Compose the diagonal {(x, (x, x))} with R ⊕ S and add the values.
        let n = self.n;
        let tol = self.tol();
        let ga = self.graph.basis();
        let gb = other.graph.basis();
        // Triples (x, y, z) with (x, y) ∈ R and (x, z) ∈ S.
        let z0 = |r: usize, c: usize| CMat::zeros(r, c);
        let id = CMat::identity(n, n);
        let s1 = hstack(&[
            &vstack(&[&ga.rows(0, n).into_owned(), &ga.rows(n, n).into_owned(), &z0(n, ga.ncols())]),
            &vstack(&[&z0(n, n), &z0(n, n), &id]),
        ]);
        let s2 = hstack(&[
            &vstack(&[&gb.rows(0, n).into_owned(), &z0(n, gb.ncols()), &gb.rows(n, n).into_owned()]),
            &vstack(&[&z0(n, n), &id, &z0(n, n)]),
        ]);
        let cap = Subspace::span_columns(&s1, tol).intersect(&Subspace::span_columns(&s2, tol))?;
        let b = cap.basis();
        let x = b.rows(0, n).into_owned();
        let yz = b.rows(n, n).into_owned() + b.rows(2 * n, n).into_owned();
        Ok(LinearRelation {
            n,
            graph: Subspace::span_columns(&vstack(&[&x, &yz]), tol),
        })
    }

    /// `{(x, λ y)}`.
    pub fn scale(&self, lambda: C64) -> LinearRelation {
        let x = self.arg_block();
        let y = self.value_block() * lambda;
        LinearRelation {
            n: self.n,
            graph: Subspace::span_columns(&vstack(&[&x, &y]), self.tol()),
        }
    }

    /// `{x : (x, λ x) ∈ R}`, computed by intersecting with the graph of `λ I`.
    pub fn eigenspace(&self, lambda: C64) -> Subspace {
        let n = self.n;
        let id = CMat::identity(n, n);
        let line = Subspace::span_columns(&vstack(&[&id, &(&id * lambda)]), self.tol());
        let cap = self.graph.intersect(&line).expect("same ambient");
        cap.coordinate_projection(0, n)
    }

    /// `C R C = {(Cx, Cy) : (x, y) ∈ R}`.
    pub fn conjugate(&self, c: &Conjugation) -> Result<LinearRelation> {
        if c.dim() != self.n {
            return Err(CsymError::input("conjugation and relation dimensions differ"));
        }
        let k = c.matrix();
        let g = self.graph.basis();
        let top = k * conj(&g.rows(0, self.n).into_owned());
        let bot = k * conj(&g.rows(self.n, self.n).into_owned());
        Ok(LinearRelation {
            n: self.n,
            graph: Subspace::span_columns(&vstack(&[&top, &bot]), self.tol()),
        })
    }

    /// Residual of the pair `(x, y)` against the graph.
    pub fn pair_residual(&self, x: &CVec, y: &CVec) -> f64 {
        let mut v = CVec::zeros(2 * self.n);
        v.rows_mut(0, self.n).copy_from(x);
        v.rows_mut(self.n, self.n).copy_from(y);
        self.graph.membership_residual(&v)
    }

    pub fn leq_residual(&self, other: &LinearRelation) -> Result<f64> {
        self.check(other)?;
        self.graph.containment_residual(&other.graph)
    }

    pub fn leq(&self, other: &LinearRelation) -> Result<bool> {
        Ok(self.leq_residual(other)? <= self.tol().eps)
    }

    /// Largest principal-angle sine between the graphs (1.0 on dimension mismatch).
    pub fn distance(&self, other: &LinearRelation) -> Result<f64> {
        self.check(other)?;
        self.graph.distance(&other.graph)
    }

    pub fn equals(&self, other: &LinearRelation) -> Result<bool> {
        Ok(self.graph_dim() == other.graph_dim() && self.distance(other)? <= self.tol().eps)
    }
}

pub fn adjoint(r: &LinearRelation) -> LinearRelation {
    r.adjoint()
}

pub fn compose(r2: &LinearRelation, r1: &LinearRelation) -> Result<LinearRelation> {
    r2.compose(r1)
}

pub fn scalar_shift(r: &LinearRelation, lambda: C64) -> LinearRelation {
    r.scalar_shift(lambda)
}

pub fn kernel_rel(r: &LinearRelation) -> Subspace {
    r.kernel()
}

pub fn multivalued_part(r: &LinearRelation) -> Subspace {
    r.multivalued_part()
}

pub fn conjugate_relation(c: &Conjugation, r: &LinearRelation) -> Result<LinearRelation> {
    r.conjugate(c)
}

pub fn relation_leq(r1: &LinearRelation, r2: &LinearRelation) -> Result<bool> {
    r1.leq(r2)
}

pub fn relation_equal(r1: &LinearRelation, r2: &LinearRelation) -> Result<bool> {
    r1.equals(r2)
}
