//! Anti-linear maps, conjugations and partial conjugations.
//!
//! An anti-linear map on `C^n` is stored as a matrix `M` acting by
//! `x -> M conj(x)`. It is a conjugation iff `M` is unitary and symmetric.

use crate::error::{CsymError, Result};
use crate::linalg::{conj, gram_residual, spectral_norm, CMat, CVec, Subspace, Tolerance, C64, I};

/// `x -> M conj(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AntiLinearMap {
    matrix: CMat,
}

impl AntiLinearMap {
    pub fn new(matrix: CMat) -> Self {
        AntiLinearMap { matrix }
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn apply(&self, x: &CVec) -> Result<CVec> {
        if x.len() != self.matrix.ncols() {
            return Err(CsymError::input(format!(
                "vector of dimension {} passed to an anti-linear map on C^{}",
                x.len(),
                self.matrix.ncols()
            )));
        }
        Ok(&self.matrix * x.map(|z| z.conj()))
    }

    /// Applies the map column by column.
    pub fn apply_columns(&self, x: &CMat) -> CMat {
        &self.matrix * conj(x)
    }

    /// Matrix of the linear map `self ∘ other`.
    pub fn compose(&self, other: &AntiLinearMap) -> CMat {
        &self.matrix * conj(&other.matrix)
    }
}

/// Residuals `(||K^*K - I||, ||K - K^T||)`.
fn conjugation_residuals(k: &CMat) -> (f64, f64) {
    let n = k.ncols();
    let unit = spectral_norm(&(k.adjoint() * k - CMat::identity(n, n)));
    let sym = spectral_norm(&(k - k.transpose()));
    (unit, sym)
}

pub fn is_conjugation(f: &AntiLinearMap, tol: Tolerance) -> bool {
    let m = f.matrix();
    if m.nrows() != m.ncols() {
        return false;
    }
    let (u, s) = conjugation_residuals(m);
    u <= tol.eps && s <= tol.eps
}

/// A conjugation `x -> K conj(x)` on `C^n`; `K` is unitary and symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct Conjugation {
    k: CMat,
}

impl Conjugation {
    pub fn new(k: CMat, tol: Tolerance) -> Result<Self> {
        if k.nrows() != k.ncols() {
            return Err(CsymError::input("conjugation matrix must be square"));
        }
        let (u, s) = conjugation_residuals(&k);
        if u > tol.eps {
            return Err(CsymError::input(format!(
                "not a conjugation: matrix is not unitary (||K*K - I|| = {u:.3e}), so C^2 = I or <Cx,Cy> = <y,x> fails"
            )));
        }
        if s > tol.eps {
            return Err(CsymError::input(format!(
                "not a conjugation: matrix is not symmetric (||K - K^T|| = {s:.3e}), so C^2 = I fails"
            )));
        }
        Ok(Conjugation { k })
    }

    /// Entrywise complex conjugation.
    pub fn entrywise(n: usize) -> Self {
        Conjugation {
            k: CMat::identity(n, n),
        }
    }

    /// `(x_1, ..., x_n) -> (conj x_n, ..., conj x_1)`.
    pub fn flip(n: usize) -> Self {
        let mut k = CMat::zeros(n, n);
        for i in 0..n {
            k[(i, n - 1 - i)] = C64::new(1.0, 0.0);
        }
        Conjugation { k }
    }

    pub fn dim(&self) -> usize {
        self.k.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.k
    }

    pub fn as_map(&self) -> AntiLinearMap {
        AntiLinearMap::new(self.k.clone())
    }

    pub fn apply(&self, x: &CVec) -> CVec {
        &self.k * x.map(|z| z.conj())
    }

    pub fn apply_columns(&self, x: &CMat) -> CMat {
        &self.k * conj(x)
    }

    /// Matrix of the linear operator `C A C`, i.e. `K conj(A) conj(K)`.
    pub fn conjugate_operator(&self, a: &CMat) -> CMat {
        &self.k * conj(a) * conj(&self.k)
    }

    pub fn is_entrywise(&self) -> bool {
        let n = self.dim();
        (self.k.clone() - CMat::identity(n, n)).iter().all(|z| z.norm() == 0.0)
    }
}

/// Anti-linear `x -> M conj(x)` with `M = M^T` and `M conj(M)` an orthogonal
/// projection; a conjugation on its initial space and zero on the complement.
#[derive(Debug, Clone)]
pub struct PartialConjugation {
    matrix: CMat,
    initial: Subspace,
}

impl PartialConjugation {
    pub fn new(matrix: CMat, tol: Tolerance) -> Result<Self> {
        let n = matrix.nrows();
        if matrix.ncols() != n {
            return Err(CsymError::input("partial conjugation matrix must be square"));
        }
        let scale = spectral_norm(&matrix).max(1.0);
        let sym = spectral_norm(&(&matrix - matrix.transpose()));
        if sym > tol.eps * scale {
            return Err(CsymError::input(format!(
                "partial conjugation matrix is not symmetric ({sym:.3e})"
            )));
        }
        let p = &matrix * conj(&matrix);
        let idem = spectral_norm(&(&p * &p - &p));
        let herm = spectral_norm(&(&p - p.adjoint()));
        if idem > tol.eps * scale || herm > tol.eps * scale {
            return Err(CsymError::input(format!(
                "applying the map twice is not an orthogonal projection ({:.3e})",
                idem.max(herm)
            )));
        }
        let initial = Subspace::span_columns(&p, tol);
        Ok(PartialConjugation { matrix, initial })
    }

    /// Zero map on `C^n`.
    pub fn zero(n: usize, tol: Tolerance) -> Self {
        PartialConjugation {
            matrix: CMat::zeros(n, n),
            initial: Subspace::zero(n, tol),
        }
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn initial_space(&self) -> &Subspace {
        &self.initial
    }

    pub fn as_map(&self) -> AntiLinearMap {
        AntiLinearMap::new(self.matrix.clone())
    }

    pub fn apply(&self, x: &CVec) -> CVec {
        &self.matrix * x.map(|z| z.conj())
    }

    /// `|| J^2 - P_initial ||`.
    pub fn square_residual(&self) -> f64 {
        let sq = &self.matrix * conj(&self.matrix);
        spectral_norm(&(sq - self.initial.projector()))
    }
}

fn check_invariant_conjugation(f: &AntiLinearMap, s: &Subspace) -> Result<()> {
    let tol = s.tol();
    let n = s.ambient();
    if f.dim() != n || f.matrix().nrows() != n {
        return Err(CsymError::input("map and subspace live in different spaces"));
    }
    let q = s.basis();
    let fq = f.apply_columns(q);
    let scale = spectral_norm(f.matrix()).max(1.0);
    let leak = spectral_norm(&(&fq - s.projector() * &fq));
    if leak > tol.eps * scale {
        return Err(CsymError::precondition(format!(
            "the map does not preserve the subspace (||(I-P) F P|| = {leak:.3e})"
        )));
    }
    let ffq = f.apply_columns(&fq);
    let square = spectral_norm(&(ffq - q));
    let iso = gram_residual(&fq);
    if square > tol.eps * scale || iso > tol.eps * scale {
        return Err(CsymError::precondition(format!(
            "the map is not a conjugation on the subspace (F^2 - I: {square:.3e}, isometry: {iso:.3e})"
        )));
    }
    Ok(())
}

/// Orthonormal basis of `s` whose vectors are fixed by the conjugation `f`.
///
/// Greedy construction: take the first basis vector `v` of the part of `s`
/// orthogonal to what has been chosen so far. Both `v + Fv` and `i(v - Fv)`
/// are fixed by `F` and orthogonal to the chosen set; the longer of the two
/// is normalized and added.
pub fn invariant_onb(f: &AntiLinearMap, s: &Subspace) -> Result<CMat> {
    check_invariant_conjugation(f, s)?;
    let n = s.ambient();
    let k = s.dim();
    let mut taken = CMat::zeros(n, 0);
    for _ in 0..k {
        let Some(v) = s.first_orthogonal_candidate(&taken)? else {
            break;
        };
        let fv = f.apply(&v)?;
        let plus = &v + &fv;
        let minus = (&v - &fv) * I;
        let mut w = if plus.norm() >= minus.norm() { plus } else { minus };
        // One pass of re-orthogonalization against the chosen vectors.
        if taken.ncols() > 0 {
            let coeff = taken.adjoint() * &w;
            w -= &taken * coeff;
        }
        let nw = w.norm();
        w /= C64::new(nw, 0.0);
        taken = crate::linalg::push_column(taken, &w);
    }
    if taken.ncols() != k {
        return Err(CsymError::violation(
            "invariant_onb.cardinality",
            "greedy construction terminated early",
            (k - taken.ncols()) as f64,
        ));
    }
    Ok(taken)
}

/// The conjugation `C_v(sum a_i v_i) = sum conj(a_i) v_i` fixing each column
/// of `v`, as a partial conjugation with initial space `span(v)`.
pub fn conjugation_from_onb(v: &CMat, tol: Tolerance) -> Result<PartialConjugation> {
    let res = gram_residual(v);
    if res > tol.eps {
        return Err(CsymError::input(format!(
            "basis is not orthonormal (Gram residual {res:.3e})"
        )));
    }
    PartialConjugation::new(v * v.transpose(), tol)
}

/// Fixed-point residual `max_i ||F v_i - v_i||`.
pub fn fixed_point_residual(f: &AntiLinearMap, v: &CMat) -> f64 {
    let fv = f.apply_columns(v);
    (0..v.ncols())
        .map(|j| (fv.column(j) - v.column(j)).norm())
        .fold(0.0, f64::max)
}

fn check_maps_onto(z: &Conjugation, h: &Subspace, k: &Subspace) -> Result<()> {
    let img = h.anti_image(z.matrix())?;
    if !img.equals(k)? {
        return Err(CsymError::precondition(
            "the conjugation Z does not map the first subspace onto the second",
        ));
    }
    Ok(())
}

/// `|| (Z V Z V - I) restricted to h ||` for a linear `v`.
pub fn zvzv_residual(z: &Conjugation, h: &Subspace, v: &CMat) -> f64 {
    let kz = z.matrix();
    let m = kz * conj(v) * conj(kz) * v;
    let q = h.basis();
    if q.ncols() == 0 {
        return 0.0;
    }
    spectral_norm(&(m * q - q))
}

/// Given a conjugation `Z` mapping `h` onto `k` and a conjugation `J` of `h`,
/// returns the unitary `V = Z J : h -> k` (as an ambient matrix vanishing on
/// the complement of `h`) after checking `ZVZV = I` on `h`.
pub fn unitary_from_conjugation(
    z: &Conjugation,
    h: &Subspace,
    k: &Subspace,
    j: &PartialConjugation,
) -> Result<CMat> {
    check_maps_onto(z, h, k)?;
    let tol = h.tol();
    if !j.initial_space().equals(h)? {
        return Err(CsymError::input("J is not a conjugation of the given subspace"));
    }
    let v = z.matrix() * conj(j.matrix());
    let vq = &v * h.basis();
    let iso = gram_residual(&vq);
    if iso > tol.eps {
        return Err(CsymError::violation("zj.unitary", "Z J is not isometric on h", iso));
    }
    let r = zvzv_residual(z, h, &v);
    if r > tol.eps {
        return Err(CsymError::violation("zvzv", "ZVZV = I fails on h", r));
    }
    Ok(v)
}

/// Converse direction: from a unitary `V : h -> k` with `ZVZV = I` on `h`,
/// returns the conjugation `J = Z V` of `h`.
pub fn conjugation_from_unitary(
    z: &Conjugation,
    h: &Subspace,
    k: &Subspace,
    v: &CMat,
) -> Result<PartialConjugation> {
    check_maps_onto(z, h, k)?;
    let tol = h.tol();
    let p = h.projector();
    let vp = v * &p;
    let vq = &vp * h.basis();
    let iso = gram_residual(&vq);
    if iso > tol.eps {
        return Err(CsymError::violation("v.unitary", "V is not isometric on h", iso));
    }
    let into = Subspace::span_columns(&vq, tol);
    if !into.is_subset_of(k)? {
        return Err(CsymError::input("V does not map h into k"));
    }
    let r = zvzv_residual(z, h, &vp);
    if r > tol.eps {
        return Err(CsymError::violation("zvzv", "ZVZV = I fails on h", r));
    }
    PartialConjugation::new(z.matrix() * conj(&vp), tol)
}

/// Splits `space` into `H0 ⊕ S H0` for an anti-involution `S` (`S^2 = -I`,
/// anti-unitary) preserving `space`. `pick` chooses a vector from the part of
/// `space` not yet covered; returns an orthonormal basis of `H0`.
pub fn split_anti_involution<F>(s: &AntiLinearMap, space: &Subspace, mut pick: F) -> Result<CMat>
where
    F: FnMut(&Subspace) -> CVec,
{
    let tol = space.tol();
    let n = space.ambient();
    let q = space.basis();
    let sq = s.apply_columns(q);
    let scale = spectral_norm(s.matrix()).max(1.0);
    let leak = spectral_norm(&(&sq - space.projector() * &sq));
    let square = spectral_norm(&(s.apply_columns(&sq) + q));
    if leak > tol.eps * scale || square > tol.eps * scale {
        return Err(CsymError::precondition(format!(
            "not an anti-involution of the subspace (leak {leak:.3e}, S^2 + I {square:.3e})"
        )));
    }
    if space.dim() % 2 != 0 {
        return Err(CsymError::precondition(
            "an anti-involution needs an even-dimensional space",
        ));
    }
    let half = space.dim() / 2;
    let mut h0 = CMat::zeros(n, 0);
    for _ in 0..half {
        let covered = crate::linalg::hstack(&[&h0, &s.apply_columns(&h0)]);
        let covered = Subspace::span_columns(&covered, tol);
        let covered = if covered.ambient() == n { covered } else { Subspace::zero(n, tol) };
        let rest = space.minus(&covered)?;
        if rest.is_zero() {
            break;
        }
        let mut v = rest.project(&pick(&rest));
        let nv = v.norm();
        if nv == 0.0 {
            v = rest.basis().column(0).into_owned();
        } else {
            v /= C64::new(nv, 0.0);
        }
        h0 = crate::linalg::push_column(h0, &v);
    }
    Ok(h0)
}
