//! Small reference problems with known extension structure.

use crate::antilinear::Conjugation;
use crate::error::{CsymError, Result};
use crate::linalg::{CMat, Subspace, Tolerance, C64, I, ONE};
use crate::random::Sampler;
use crate::relations::{DomainOperator, LinearRelation};

/// A C-symmetric operator together with its conjugation.
#[derive(Debug, Clone)]
pub struct Problem {
    pub name: String,
    pub operator: DomainOperator,
    pub relation: LinearRelation,
    pub conjugation: Conjugation,
}

impl Problem {
    pub fn new(name: impl Into<String>, operator: DomainOperator, conjugation: Conjugation) -> Result<Self> {
        if conjugation.dim() != operator.domain().ambient() {
            return Err(CsymError::input("conjugation and operator dimensions differ"));
        }
        let relation = operator.to_relation();
        Ok(Problem {
            name: name.into(),
            operator,
            relation,
            conjugation,
        })
    }

    pub fn dim(&self) -> usize {
        self.conjugation.dim()
    }
}

fn coordinate_span(n: usize, idx: impl Iterator<Item = usize>, tol: Tolerance) -> Subspace {
    let idx: Vec<usize> = idx.collect();
    let mut m = CMat::zeros(n, idx.len());
    for (col, &i) in idx.iter().enumerate() {
        m[(i, col)] = ONE;
    }
    Subspace::span_columns(&m, tol)
}

/// The zero operator on `span{e_2, ..., e_{n-1}}` with entrywise conjugation.
pub fn zero_on_subspace(n: usize, tol: Tolerance) -> Result<Problem> {
    if n < 3 {
        return Err(CsymError::input("zero_on_subspace needs n >= 3"));
    }
    let d = coordinate_span(n, 1..n - 1, tol);
    let images = CMat::zeros(n, d.dim());
    let op = DomainOperator::new(d, images)?;
    Problem::new("zero_on_subspace", op, Conjugation::entrywise(n))
}

pub fn f_zero(tol: Tolerance) -> Problem {
    zero_on_subspace(4, tol).expect("n = 4 is valid")
}

/// The identity restricted to `span{e_1}` in `C^2`.
pub fn f_min(tol: Tolerance) -> Problem {
    let d = coordinate_span(2, 0..1, tol);
    let op = DomainOperator::restriction(&CMat::identity(2, 2), d).expect("dimensions match");
    Problem::new("minimal_identity", op, Conjugation::entrywise(2)).expect("dimensions match")
}

fn interior(n: usize, tol: Tolerance) -> Subspace {
    coordinate_span(n, 1..n - 1, tol)
}

/// Central-difference model of `d²/dx² - 2i e^{2(1+i)x}` on the grid `x_j = j h`,
/// restricted to vectors vanishing at both boundary-adjacent points.
pub fn race_schrodinger(n: usize, h: f64, tol: Tolerance) -> Result<Problem> {
    if n < 4 {
        return Err(CsymError::input("race_schrodinger needs n >= 4"));
    }
    if !(h.is_finite() && h > 0.0) {
        return Err(CsymError::input("grid spacing must be positive"));
    }
    let l = race_matrix(n, h);
    let op = DomainOperator::restriction(&l, interior(n, tol))?;
    Problem::new("race_schrodinger", op, Conjugation::entrywise(n))
}

/// The full complex symmetric matrix behind [`race_schrodinger`].
pub fn race_matrix(n: usize, h: f64) -> CMat {
    let inv = 1.0 / (h * h);
    let mut l = CMat::zeros(n, n);
    for j in 0..n {
        let x = (j + 1) as f64 * h;
        let pot = -2.0 * I * (C64::new(2.0 * x, 2.0 * x)).exp();
        l[(j, j)] = C64::new(-2.0 * inv, 0.0) + pot;
        if j + 1 < n {
            l[(j, j + 1)] = C64::new(inv, 0.0);
            l[(j + 1, j)] = C64::new(inv, 0.0);
        }
    }
    l
}

/// `i/(2h)` times the central first difference, restricted to the interior,
/// with the flip conjugation.
pub fn fd_derivative_minimal(n: usize, h: f64, tol: Tolerance) -> Result<Problem> {
    if n < 4 {
        return Err(CsymError::input("fd_derivative_minimal needs n >= 4"));
    }
    if !(h.is_finite() && h > 0.0) {
        return Err(CsymError::input("grid spacing must be positive"));
    }
    let s = C64::new(0.0, 1.0 / (2.0 * h));
    let mut d = CMat::zeros(n, n);
    for j in 0..n - 1 {
        d[(j, j + 1)] = s;
        d[(j + 1, j)] = -s;
    }
    let op = DomainOperator::restriction(&d, interior(n, tol))?;
    Problem::new("fd_derivative_minimal", op, Conjugation::flip(n))
}

/// `A = K S` with `S` complex symmetric and `K` a random conjugation matrix;
/// everywhere defined and C-self-adjoint.
pub fn random_csym(n: usize, seed: u64, tol: Tolerance) -> Result<Problem> {
    if n == 0 {
        return Err(CsymError::input("dimension must be positive"));
    }
    let mut rng = Sampler::new(seed);
    let c = rng.conjugation(n);
    let a = rng.c_selfadjoint_matrix(&c);
    let op = DomainOperator::restriction(&a, Subspace::full(n, tol))?;
    Problem::new("random_csym", op, c)
}

/// Restriction of a random C-self-adjoint matrix to a random proper subspace.
pub fn random_restriction(rng: &mut Sampler, n: usize, k: usize, tol: Tolerance) -> Result<Problem> {
    if k >= n {
        return Err(CsymError::input("restriction needs a proper subspace"));
    }
    let c = rng.conjugation(n);
    let a = rng.c_selfadjoint_matrix(&c);
    let d = rng.subspace(n, k, tol);
    let op = DomainOperator::restriction(&a, d)?;
    Problem::new("random_restriction", op, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csym::{is_c_selfadjoint, is_c_symmetric, weak_symmetry_residual};

    #[test]
    fn fixtures_are_c_symmetric() {
        let tol = Tolerance::default();
        let mut rng = Sampler::new(3);
        let problems = vec![
            f_zero(tol),
            f_min(tol),
            race_schrodinger(16, 0.25, tol).unwrap(),
            fd_derivative_minimal(8, 0.5, tol).unwrap(),
            random_csym(6, 7, tol).unwrap(),
            random_restriction(&mut rng, 5, 3, tol).unwrap(),
        ];
        for p in &problems {
            assert!(is_c_symmetric(&p.relation, &p.conjugation).unwrap(), "{}", p.name);
            let w = weak_symmetry_residual(&p.operator, &p.conjugation).unwrap();
            assert!(w < 1e-9, "{} weak residual {w}", p.name);
        }
        assert!(is_c_selfadjoint(&problems[4].relation, &problems[4].conjugation).unwrap());
        assert!(!is_c_selfadjoint(&problems[2].relation, &problems[2].conjugation).unwrap());
    }

    #[test]
    fn random_csym_is_deterministic() {
        let tol = Tolerance::default();
        let a = random_csym(6, 7, tol).unwrap();
        let b = random_csym(6, 7, tol).unwrap();
        assert_eq!(a.operator.images(), b.operator.images());
    }

    #[test]
    fn small_sizes_rejected() {
        let tol = Tolerance::default();
        assert!(race_schrodinger(3, 0.1, tol).is_err());
        assert!(fd_derivative_minimal(2, 0.1, tol).is_err());
    }
}
