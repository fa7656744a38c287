//! Dense complex linear algebra substrate.
//!
//! Every subspace is stored through an orthonormal basis and every rank
//! decision goes through singular values with a single scale rule: a
//! singular value `s` counts as zero iff `s <= eps * max(1, s_max)`.
//! Inner products are linear in the first argument,
//! `<u, v> = sum_i u_i * conj(v_i)`.

use nalgebra::{DMatrix, DVector, SVD};
use num_complex::Complex64;

use crate::error::{CsymError, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);

/// Threshold governing rank and equality decisions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub eps: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { eps: 1e-10 }
    }
}

impl Tolerance {
    pub fn new(eps: f64) -> Result<Self> {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(CsymError::input(format!(
                "tolerance must be a positive finite number, got {eps}"
            )));
        }
        Ok(Tolerance { eps })
    }

    /// The singular-value scale rule.
    pub fn is_negligible(&self, sigma: f64, sigma_max: f64) -> bool {
        sigma <= self.eps * sigma_max.max(1.0)
    }

    pub fn sqrt_eps(&self) -> f64 {
        self.eps.sqrt()
    }
}

/// `<u, v> = sum u_i conj(v_i)`.
pub fn inner(u: &CVec, v: &CVec) -> C64 {
    v.dotc(u)
}

pub fn spectral_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    svd_sorted(m).sigma.first().copied().unwrap_or(0.0)
}

pub fn all_finite(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn conj(m: &CMat) -> CMat {
    m.map(|z| z.conj())
}

pub fn conj_vec(v: &CVec) -> CVec {
    v.map(|z| z.conj())
}

/// Thin SVD with singular values sorted in descending order.
pub struct SortedSvd {
    pub u: CMat,
    pub sigma: Vec<f64>,
    pub v: CMat,
}

pub fn svd_sorted(m: &CMat) -> SortedSvd {
    let (r, c) = m.shape();
    let k = r.min(c);
    if k == 0 {
        return SortedSvd {
            u: CMat::zeros(r, 0),
            sigma: Vec::new(),
            v: CMat::zeros(c, 0),
        };
    }
    let (u, sigma, v) = match library_svd(m) {
        Some(f) if factorization_residual(m, &f.0, &f.1, &f.2) <= svd_acceptance(m) => f,
        _ => jacobi_svd(m),
    };
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| sigma[b].partial_cmp(&sigma[a]).unwrap_or(std::cmp::Ordering::Equal));
    let mut us = CMat::zeros(r, k);
    let mut vs = CMat::zeros(c, k);
    let mut sorted = Vec::with_capacity(k);
    for (dst, &src) in order.iter().enumerate() {
        us.set_column(dst, &u.column(src));
        vs.set_column(dst, &v.column(src));
        sorted.push(sigma[src]);
    }
    SortedSvd { u: us, sigma: sorted, v: vs }
}

type Factors = (CMat, Vec<f64>, CMat);

fn library_svd(m: &CMat) -> Option<Factors> {
    let svd = SVD::try_new(m.clone(), true, true, f64::EPSILON, 0)?;
    let u = svd.u?;
    let v = svd.v_t?.adjoint();
    Some((u, svd.singular_values.iter().copied().collect(), v))
}

fn svd_acceptance(m: &CMat) -> f64 {
    let (r, c) = m.shape();
    64.0 * f64::EPSILON * (r.max(c) as f64) * m.norm().max(1.0)
}

/// Largest of the reconstruction error and the two Gram defects.
fn factorization_residual(m: &CMat, u: &CMat, sigma: &[f64], v: &CMat) -> f64 {
    if sigma.iter().any(|s| !s.is_finite() || *s < 0.0) {
        return f64::INFINITY;
    }
    let mut us = u.clone();
    for (j, s) in sigma.iter().enumerate() {
        us.column_mut(j).scale_mut(*s);
    }
    let rec = (us * v.adjoint() - m).norm();
    let scale = m.norm().max(1.0);
    let gu = (u.adjoint() * u - CMat::identity(u.ncols(), u.ncols())).norm();
    let gv = (v.adjoint() * v - CMat::identity(v.ncols(), v.ncols())).norm();
    (rec / scale).max(gu).max(gv) * scale
}

/// One-sided Jacobi SVD. Slow but reliable on the degenerate inputs where
/// the bidiagonal iteration occasionally returns a wrong factorization.
fn jacobi_svd(m: &CMat) -> Factors {
    let (r, c) = m.shape();
    if r < c {
        let (u, s, v) = jacobi_svd(&m.adjoint());
        return (v, s, u);
    }
    let mut w = m.clone();
    let mut v = CMat::identity(c, c);
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..c {
            for q in p + 1..c {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(q).dotc(&w.column(p));
                let g = gamma.norm();
                if g <= f64::EPSILON * (alpha * beta).sqrt() || g == 0.0 {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for mat in [&mut w, &mut v] {
                    for i in 0..mat.nrows() {
                        let xp = mat[(i, p)];
                        let xq = mat[(i, q)] * phase;
                        mat[(i, p)] = xp * cs - xq * sn;
                        mat[(i, q)] = xp * sn + xq * cs;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let sigma: Vec<f64> = (0..c).map(|j| w.column(j).norm()).collect();
    let smax = sigma.iter().copied().fold(0.0, f64::max);
    let mut u = CMat::zeros(r, c);
    let mut deficient = Vec::new();
    for j in 0..c {
        if sigma[j] > f64::EPSILON * smax.max(f64::MIN_POSITIVE) * (r as f64) {
            u.set_column(j, &(w.column(j) / C64::new(sigma[j], 0.0)));
        } else {
            deficient.push(j);
        }
    }
    let mut e = 0;
    for j in deficient {
        loop {
            let mut x = CVec::zeros(r);
            x[e % r] = ONE;
            e += 1;
            for _pass in 0..2 {
                for k in 0..c {
                    let uk = u.column(k).into_owned();
                    let coef = uk.dotc(&x);
                    x -= uk * coef;
                }
            }
            let nx = x.norm();
            if nx > 0.5 || e > 2 * r {
                u.set_column(j, &(x / C64::new(nx, 0.0)));
                break;
            }
        }
    }
    (u, sigma, v)
}

/// Numerical rank of `m` under the scale rule.
pub fn rank(m: &CMat, tol: Tolerance) -> usize {
    let s = svd_sorted(m);
    let smax = s.sigma.first().copied().unwrap_or(0.0);
    s.sigma.iter().filter(|&&x| !tol.is_negligible(x, smax)).count()
}

pub fn hstack(blocks: &[&CMat]) -> CMat {
    let rows = blocks.first().map(|b| b.nrows()).unwrap_or(0);
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMat::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        assert_eq!(b.nrows(), rows, "hstack row mismatch");
        out.view_mut((0, at), (rows, b.ncols())).copy_from(b);
        at += b.ncols();
    }
    out
}

pub fn vstack(blocks: &[&CMat]) -> CMat {
    let cols = blocks.first().map(|b| b.ncols()).unwrap_or(0);
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMat::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        assert_eq!(b.ncols(), cols, "vstack column mismatch");
        out.view_mut((at, 0), (b.nrows(), cols)).copy_from(b);
        at += b.nrows();
    }
    out
}

pub fn columns_to_matrix(vectors: &[CVec], n: usize) -> Result<CMat> {
    let mut m = CMat::zeros(n, vectors.len());
    for (j, v) in vectors.iter().enumerate() {
        if v.len() != n {
            return Err(CsymError::input(format!(
                "vector {j} has dimension {}, expected {n}",
                v.len()
            )));
        }
        m.set_column(j, v);
    }
    Ok(m)
}

pub fn push_column(m: CMat, v: &CVec) -> CMat {
    let j = m.ncols();
    let mut out = m.insert_column(j, ZERO);
    out.set_column(j, v);
    out
}

/// Largest deviation of `q* q` from the identity.
pub fn gram_residual(q: &CMat) -> f64 {
    let k = q.ncols();
    if k == 0 {
        return 0.0;
    }
    let g = q.adjoint() * q - CMat::identity(k, k);
    spectral_norm(&g)
}

/// A linear subspace of `C^n` held through an orthonormal basis.
#[derive(Debug, Clone)]
pub struct Subspace {
    ambient: usize,
    basis: CMat,
    tol: Tolerance,
}

impl Subspace {
    pub fn zero(n: usize, tol: Tolerance) -> Self {
        Subspace {
            ambient: n,
            basis: CMat::zeros(n, 0),
            tol,
        }
    }

    pub fn full(n: usize, tol: Tolerance) -> Self {
        Subspace {
            ambient: n,
            basis: CMat::identity(n, n),
            tol,
        }
    }

    /// Span of the columns of `m`; the rank is decided by the scale rule.
    pub fn span_columns(m: &CMat, tol: Tolerance) -> Self {
        let n = m.nrows();
        if m.ncols() == 0 || n == 0 {
            return Subspace::zero(n, tol);
        }
        let s = svd_sorted(m);
        let smax = s.sigma.first().copied().unwrap_or(0.0);
        let r = s.sigma.iter().filter(|&&x| !tol.is_negligible(x, smax)).count();
        Subspace {
            ambient: n,
            basis: s.u.columns(0, r).into_owned(),
            tol,
        }
    }

    /// Wraps a basis that is already orthonormal.
    pub fn from_orthonormal(basis: CMat, tol: Tolerance) -> Result<Self> {
        let res = gram_residual(&basis);
        if res > tol.sqrt_eps() {
            return Err(CsymError::input(format!(
                "basis is not orthonormal (Gram residual {res:.3e})"
            )));
        }
        // Re-orthonormalize; this keeps the stored basis exact to rounding.
        let k = basis.ncols();
        let s = Subspace::span_columns(&basis, tol);
        if s.dim() != k {
            return Err(CsymError::input("basis columns are linearly dependent"));
        }
        Ok(s)
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &CMat {
        &self.basis
    }

    pub fn tol(&self) -> Tolerance {
        self.tol
    }

    pub fn with_tol(mut self, tol: Tolerance) -> Self {
        self.tol = tol;
        self
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn projector(&self) -> CMat {
        &self.basis * self.basis.adjoint()
    }

    pub fn project(&self, v: &CVec) -> CVec {
        &self.basis * (self.basis.adjoint() * v)
    }

    /// `||v - P v|| / max(1, ||v||)`.
    pub fn membership_residual(&self, v: &CVec) -> f64 {
        let r = v - self.project(v);
        r.norm() / v.norm().max(1.0)
    }

    pub fn contains(&self, v: &CVec) -> bool {
        self.membership_residual(v) <= self.tol.eps
    }

    fn check_ambient(&self, other: &Subspace) -> Result<()> {
        if self.ambient != other.ambient {
            return Err(CsymError::input(format!(
                "ambient dimension mismatch: {} vs {}",
                self.ambient, other.ambient
            )));
        }
        Ok(())
    }

    /// Orthogonal complement in the ambient space.
    pub fn complement(&self) -> Subspace {
        let n = self.ambient;
        let k = self.dim();
        if k == 0 {
            return Subspace::full(n, self.tol);
        }
        if k >= n {
            return Subspace::zero(n, self.tol);
        }
        let p = CMat::identity(n, n) - self.projector();
        let s = svd_sorted(&p);
        // Eigenvalues of a projector are 0 or 1: take exactly n - k columns.
        Subspace {
            ambient: n,
            basis: s.u.columns(0, n - k).into_owned(),
            tol: self.tol,
        }
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        self.check_ambient(other)?;
        Ok(Subspace::span_columns(
            &hstack(&[&self.basis, &other.basis]),
            self.tol,
        ))
    }

    pub fn intersect(&self, other: &Subspace) -> Result<Subspace> {
        self.check_ambient(other)?;
        let c = self.complement().sum(&other.complement())?;
        Ok(c.complement())
    }

    /// `self ⊖ sub`: the orthogonal complement of `sub` inside `self`.
    pub fn minus(&self, sub: &Subspace) -> Result<Subspace> {
        self.check_ambient(sub)?;
        if sub.is_zero() {
            return Ok(self.clone());
        }
        if self.is_zero() {
            return Ok(self.clone());
        }
        let m = &self.basis - sub.projector() * &self.basis;
        let s = Subspace::span_columns(&m, self.tol);
        Ok(s)
    }

    /// `|| (I - P_other) Q_self ||`, zero iff `self ⊆ other`.
    pub fn containment_residual(&self, other: &Subspace) -> Result<f64> {
        self.check_ambient(other)?;
        if self.is_zero() {
            return Ok(0.0);
        }
        let r = &self.basis - other.projector() * &self.basis;
        Ok(spectral_norm(&r))
    }

    pub fn is_subset_of(&self, other: &Subspace) -> Result<bool> {
        Ok(self.containment_residual(other)? <= self.tol.eps)
    }

    /// Sine of the largest principal angle; `1.0` when the dimensions differ.
    pub fn distance(&self, other: &Subspace) -> Result<f64> {
        self.check_ambient(other)?;
        if self.dim() != other.dim() {
            return Ok(1.0);
        }
        let a = self.containment_residual(other)?;
        let b = other.containment_residual(self)?;
        Ok(a.max(b))
    }

    pub fn equals(&self, other: &Subspace) -> Result<bool> {
        Ok(self.dim() == other.dim() && self.distance(other)? <= self.tol.eps)
    }

    /// `|| Q_self^* Q_other ||`.
    pub fn orthogonality_residual(&self, other: &Subspace) -> Result<f64> {
        self.check_ambient(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(0.0);
        }
        Ok(spectral_norm(&(self.basis.adjoint() * &other.basis)))
    }

    /// Image under a linear map `C^n -> C^m`.
    pub fn image(&self, m: &CMat) -> Result<Subspace> {
        if m.ncols() != self.ambient {
            return Err(CsymError::input("matrix does not act on this subspace"));
        }
        Ok(Subspace::span_columns(&(m * &self.basis), self.tol))
    }

    /// Image under the anti-linear map `x -> m conj(x)`.
    pub fn anti_image(&self, m: &CMat) -> Result<Subspace> {
        if m.ncols() != self.ambient {
            return Err(CsymError::input("matrix does not act on this subspace"));
        }
        Ok(Subspace::span_columns(&(m * conj(&self.basis)), self.tol))
    }

    /// Projection onto the coordinate block `start..start+len`.
    pub fn coordinate_projection(&self, start: usize, len: usize) -> Subspace {
        let rows = self.basis.rows(start, len).into_owned();
        Subspace::span_columns(&rows, self.tol)
    }

    /// The first column of `self ⊖ span(taken)`, if any.
    pub(crate) fn first_orthogonal_candidate(&self, taken: &CMat) -> Result<Option<CVec>> {
        let t = Subspace::span_columns(taken, self.tol);
        let rest = self.minus(&t)?;
        Ok(if rest.is_zero() {
            None
        } else {
            Some(rest.basis.column(0).into_owned())
        })
    }
}

/// Orthonormal basis of the span of `vectors` in `C^n`.
pub fn orthonormal_basis(vectors: &[CVec], n: usize, tol: Tolerance) -> Result<Subspace> {
    let m = columns_to_matrix(vectors, n)?;
    Ok(Subspace::span_columns(&m, tol))
}

pub fn complement(s: &Subspace) -> Subspace {
    s.complement()
}

pub fn intersect(s1: &Subspace, s2: &Subspace) -> Result<Subspace> {
    s1.intersect(s2)
}

pub fn subspace_equal(s1: &Subspace, s2: &Subspace) -> Result<bool> {
    s1.equals(s2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::Sampler;

    fn e(n: usize, i: usize) -> CVec {
        let mut v = CVec::zeros(n);
        v[i] = ONE;
        v
    }

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn collinear_vectors_span_a_line() {
        let v1 = CVec::from_vec(vec![ONE, ZERO]);
        let v2 = CVec::from_vec(vec![C64::new(2.0, 0.0), ZERO]);
        let s = orthonormal_basis(&[v1, v2], 2, tol()).unwrap();
        assert_eq!(s.dim(), 1);
        assert!(s.contains(&e(2, 0)));
    }

    #[test]
    fn empty_input_gives_zero_subspace() {
        let s = orthonormal_basis(&[], 3, tol()).unwrap();
        assert_eq!(s.dim(), 0);
        assert_eq!(s.ambient(), 3);
    }

    #[test]
    fn dimension_mismatch_is_input_error() {
        let err = orthonormal_basis(&[CVec::zeros(2), CVec::zeros(3)], 2, tol()).unwrap_err();
        assert!(matches!(err, CsymError::Input(_)));
    }

    #[test]
    fn many_random_vectors_fill_the_space() {
        let mut rng = Sampler::new(11);
        let vs: Vec<CVec> = (0..50).map(|_| rng.gaussian_vector(8)).collect();
        let s = orthonormal_basis(&vs, 8, tol()).unwrap();
        // Gram determinant of the first 8 vectors is nonzero: independent check.
        let m = columns_to_matrix(&vs[..8], 8).unwrap();
        let det = (m.adjoint() * &m).determinant();
        assert!(det.norm() > 1e-8);
        assert_eq!(s.dim(), 8);
    }

    #[test]
    fn complement_examples() {
        let s = orthonormal_basis(&[e(2, 0)], 2, tol()).unwrap();
        let c = s.complement();
        assert_eq!(c.dim(), 1);
        assert!(c.contains(&e(2, 1)));
        assert_eq!(Subspace::full(4, tol()).complement().dim(), 0);

        let mut rng = Sampler::new(3);
        let s = rng.random_subspace(7, 3, tol());
        let t = s.complement();
        assert_eq!(t.dim(), 4);
        assert!(s.orthogonality_residual(&t).unwrap() <= 1e-10);
    }

    #[test]
    fn intersect_examples() {
        let s1 = orthonormal_basis(&[e(3, 0), e(3, 1)], 3, tol()).unwrap();
        let s2 = orthonormal_basis(&[e(3, 1), e(3, 2)], 3, tol()).unwrap();
        let s = s1.intersect(&s2).unwrap();
        assert_eq!(s.dim(), 1);
        assert!(s.contains(&e(3, 1)));
        assert!(s1.intersect(&s1).unwrap().equals(&s1).unwrap());

        let mut rng = Sampler::new(5);
        let a = rng.random_subspace(8, 5, tol());
        let b = rng.random_subspace(8, 5, tol());
        let sum = a.sum(&b).unwrap();
        let cap = a.intersect(&b).unwrap();
        assert_eq!(cap.dim(), a.dim() + b.dim() - sum.dim());
        assert_eq!(cap.dim(), 2);
        let ambient_mismatch = a.intersect(&Subspace::full(3, tol()));
        assert!(ambient_mismatch.is_err());
    }

    #[test]
    fn equality_examples() {
        let s1 = orthonormal_basis(&[e(2, 0)], 2, tol()).unwrap();
        let s2 = orthonormal_basis(&[e(2, 0) * C64::new(2.0, 0.0)], 2, tol()).unwrap();
        let s3 = orthonormal_basis(&[e(2, 1)], 2, tol()).unwrap();
        assert!(subspace_equal(&s1, &s2).unwrap());
        assert!(!subspace_equal(&s1, &s3).unwrap());

        // A rotation by a unitary with ||Q - I|| ~ 1e-13.
        let mut rng = Sampler::new(9);
        let s = rng.random_subspace(6, 3, tol());
        let h = rng.gaussian_matrix(6, 6);
        let h = (&h + h.adjoint()) * C64::new(0.5e-13, 0.0);
        // exp(iH) to first order; re-orthonormalized by span_columns.
        let q = CMat::identity(6, 6) + h * I;
        let rotated = s.image(&q).unwrap();
        let angle = s.distance(&rotated).unwrap();
        assert!(angle < 1e-12 && angle > 0.0 || angle == 0.0);
        assert!(s.equals(&rotated).unwrap());
    }

    #[test]
    fn tolerance_rejects_nonpositive() {
        assert!(Tolerance::new(0.0).is_err());
        assert!(Tolerance::new(f64::NAN).is_err());
        assert!(Tolerance::new(1e-8).is_ok());
    }

    #[test]
    fn jacobi_svd_factorizes_rank_deficient_input() {
        let mut rng = Sampler::new(21);
        for (r, c, k) in [(6, 6, 1), (5, 8, 3), (9, 4, 4), (7, 7, 0)] {
            let m = rng.gaussian_matrix(r, k) * rng.gaussian_matrix(k, c);
            let (u, sigma, v) = jacobi_svd(&m);
            assert!(factorization_residual(&m, &u, &sigma, &v) < 1e-12, "{r}x{c} rank {k}");
            let nonzero = sigma.iter().filter(|&&s| s > 1e-10).count();
            assert_eq!(nonzero, k);
        }
    }

    #[test]
    fn complement_of_graph_projector_is_orthogonal() {
        let tol = Tolerance::default();
        let mut rng = Sampler::new(10);
        for n in [4, 6, 9] {
            let s = rng.subspace(n, n - 1, tol);
            let c = s.complement();
            assert_eq!(c.dim(), 1);
            assert!(s.orthogonality_residual(&c).unwrap() < 1e-12);
        }
    }
}
