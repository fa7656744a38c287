//! Polar decomposition, its behaviour under conjugation, the factorization
//! `A = CJT` of C-self-adjoint matrices, and Takagi factorization.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::antilinear::{Conjugation, PartialConjugation};
use crate::checks::Check;
use crate::error::{CsymError, Result};
use crate::linalg::{conj, spectral_norm, svd_sorted, CMat, Subspace, Tolerance, C64};

#[derive(Debug, Clone)]
pub struct PolarFactors {
    /// Partial isometry `U_A` from `ran |A|` onto `ran A`.
    pub phase: CMat,
    /// `|A| = (A*A)^{1/2}`.
    pub modulus: CMat,
    pub rank: usize,
    pub checks: Vec<Check>,
}

fn check_square(a: &CMat) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(CsymError::input(format!(
            "expected a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(())
}

fn scale(a: &CMat) -> f64 {
    spectral_norm(a).max(1.0)
}

pub fn polar(a: &CMat, tol: Tolerance) -> Result<PolarFactors> {
    check_square(a)?;
    let n = a.nrows();
    let s = svd_sorted(a);
    let smax = s.sigma.first().copied().unwrap_or(0.0);
    let rank = s.sigma.iter().filter(|&&x| !tol.is_negligible(x, smax)).count();
    let mut vs = s.v.clone();
    for (j, sigma) in s.sigma.iter().enumerate() {
        vs.column_mut(j).scale_mut(*sigma);
    }
    let modulus = vs * s.v.adjoint();
    let modulus = (&modulus + modulus.adjoint()) * C64::new(0.5, 0.0);
    let phase = if n == 0 {
        CMat::zeros(0, 0)
    } else {
        s.u.columns(0, rank) * s.v.columns(0, rank).adjoint()
    };
    let bound = tol.eps * scale(a);
    let checks = vec![
        Check::residual("polar.reconstruction", spectral_norm(&(&phase * &modulus - a)), bound),
        Check::residual(
            "polar.partial_isometry",
            spectral_norm(&(&phase * phase.adjoint() * &phase - &phase)),
            tol.eps,
        ),
        Check::residual(
            "polar.modulus_squared",
            spectral_norm(&(&modulus * &modulus - a.adjoint() * a)),
            bound * scale(a),
        ),
    ];
    Ok(PolarFactors {
        phase,
        modulus,
        rank,
        checks,
    })
}

#[derive(Debug, Clone)]
pub struct CovarianceReport {
    /// `‖ |CAC| - C|A|C ‖`.
    pub modulus_residual: f64,
    /// `‖ U_{CAC} - C U_A C ‖`.
    pub phase_residual: f64,
    /// `‖ C|A|C - |A| ‖` when `A` is C-real.
    pub c_real_residual: Option<f64>,
    pub checks: Vec<Check>,
}

pub fn conjugation_covariance(a: &CMat, c: &Conjugation, tol: Tolerance) -> Result<CovarianceReport> {
    check_square(a)?;
    if c.dim() != a.nrows() {
        return Err(CsymError::input("conjugation and matrix dimensions differ"));
    }
    let pa = polar(a, tol)?;
    let cac = c.conjugate_operator(a);
    let pc = polar(&cac, tol)?;
    let bound = tol.eps * scale(a);
    let modulus_residual = spectral_norm(&(&pc.modulus - c.conjugate_operator(&pa.modulus)));
    let phase_residual = spectral_norm(&(&pc.phase - c.conjugate_operator(&pa.phase)));
    let mut checks = vec![
        Check::residual("polar.modulus_covariance", modulus_residual, bound),
        Check::residual("polar.phase_covariance", phase_residual, tol.eps * 10.0),
    ];
    let c_real = spectral_norm(&(&cac - a)) <= bound;
    let c_real_residual = if c_real {
        let r = spectral_norm(&(c.conjugate_operator(&pa.modulus) - &pa.modulus));
        checks.push(Check::residual("polar.c_real_modulus", r, bound));
        Some(r)
    } else {
        None
    };
    if let Some(bad) = checks.iter().find(|ch| !ch.ok()) {
        return Err(CsymError::violation(bad.key.clone(), "conjugation covariance fails", bad.residual));
    }
    Ok(CovarianceReport {
        modulus_residual,
        phase_residual,
        c_real_residual,
        checks,
    })
}

#[derive(Debug, Clone)]
pub struct CjtFactors {
    pub j: PartialConjugation,
    pub t: CMat,
    pub phase: CMat,
    pub checks: Vec<Check>,
}

/// Diagnosis attached to a refusal: the identities `(U_A)* = C U_A C` and
/// `|A*| = C|A|C` that a C-self-adjoint matrix satisfies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClauseTwo {
    pub selfadjoint_residual: f64,
    pub phase_residual: f64,
    pub modulus_residual: f64,
}

#[derive(Debug, Clone)]
pub enum CjtOutcome {
    Factorized(CjtFactors),
    Refused(ClauseTwo),
}

impl CjtOutcome {
    pub fn factors(&self) -> Option<&CjtFactors> {
        match self {
            CjtOutcome::Factorized(f) => Some(f),
            CjtOutcome::Refused(_) => None,
        }
    }
}

pub fn cjt_factorization(a: &CMat, c: &Conjugation, tol: Tolerance) -> Result<CjtOutcome> {
    check_square(a)?;
    if c.dim() != a.nrows() {
        return Err(CsymError::input("conjugation and matrix dimensions differ"));
    }
    let bound = tol.eps * scale(a);
    let pa = polar(a, tol)?;
    let pstar = polar(&a.adjoint(), tol)?;
    let clause = ClauseTwo {
        selfadjoint_residual: spectral_norm(&(c.conjugate_operator(a) - a.adjoint())),
        phase_residual: spectral_norm(&(pa.phase.adjoint() - c.conjugate_operator(&pa.phase))),
        modulus_residual: spectral_norm(&(&pstar.modulus - c.conjugate_operator(&pa.modulus))),
    };
    if clause.selfadjoint_residual > bound {
        return Ok(CjtOutcome::Refused(clause));
    }

    let k = c.matrix();
    let jm = k * conj(&pa.phase);
    let jm = (&jm + jm.transpose()) * C64::new(0.5, 0.0);
    let j = PartialConjugation::new(jm.clone(), tol)?;
    let t = pa.modulus.clone();
    let n = a.nrows();

    let range_t = Subspace::span_columns(&t, tol);
    let mut recon = CMat::zeros(n, n);
    let jmap = j.as_map();
    for col in 0..n {
        let tx = t.column(col).into_owned();
        let jtx = jmap.apply(&tx)?;
        recon.set_column(col, &c.apply(&jtx));
    }
    let jtj = &jm * conj(&t) * conj(&jm);
    let p = range_t.projector();
    let cj = k * conj(&jm);
    let checks = vec![
        Check::residual("cjt.reconstruction", spectral_norm(&(recon - a)), bound),
        Check::residual(
            "cjt.j_initial_space",
            j.initial_space().distance(&range_t)?,
            tol.eps,
        ),
        Check::residual("cjt.j_square", j.square_residual(), tol.eps),
        Check::residual("cjt.jtj_equals_t", spectral_norm(&((jtj - &t) * &p)), bound),
        Check::residual(
            "cjt.t_squared_is_a_star_a",
            spectral_norm(&(&t * &t - a.adjoint() * a)),
            bound * scale(a),
        ),
        Check::residual("cjt.cj_equals_phase", spectral_norm(&(cj - &pa.phase)), tol.eps),
        Check::residual("cjt.phase_adjoint_clause", clause.phase_residual, tol.eps * 10.0),
        Check::residual("cjt.modulus_adjoint_clause", clause.modulus_residual, bound),
    ];
    Ok(CjtOutcome::Factorized(CjtFactors {
        j,
        t,
        phase: pa.phase,
        checks,
    }))
}

#[derive(Debug, Clone)]
pub struct Takagi {
    pub v: CMat,
    /// Descending.
    pub sigma: Vec<f64>,
    pub checks: Vec<Check>,
}

/// `A = V Σ Vᵀ` for complex symmetric `A`, via the real symmetric matrix
/// `[[X, Y], [Y, -X]]` (`A = X + iY`) whose eigenpairs `((p, q), s)` with
/// `s > 0` give `A conj(p + iq) = s (p + iq)`.
pub fn takagi(a: &CMat, tol: Tolerance) -> Result<Takagi> {
    check_square(a)?;
    let n = a.nrows();
    let bound = tol.eps * scale(a);
    let asym = spectral_norm(&(a - a.transpose()));
    if asym > bound {
        return Err(CsymError::input(format!(
            "takagi needs a complex symmetric matrix (||A - A^T|| = {asym:.3e})"
        )));
    }
    let a = (a + a.transpose()) * C64::new(0.5, 0.0);
    let h = DMatrix::<f64>::from_fn(2 * n, 2 * n, |i, j| {
        let z = a[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) => z.re,
            (false, false) => -z.re,
            _ => z.im,
        }
    });
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));
    let smax = eig.eigenvalues.iter().copied().fold(0.0, f64::max);

    let mut v = CMat::zeros(n, n);
    let mut sigma = vec![0.0; n];
    let mut r = 0;
    for &idx in order.iter().take(n) {
        let s = eig.eigenvalues[idx];
        if tol.is_negligible(s, smax) {
            break;
        }
        let col = eig.eigenvectors.column(idx);
        let mut w = crate::linalg::CVec::from_fn(n, |i, _| C64::new(col[i], col[n + i]));
        let nw = w.norm();
        w /= C64::new(nw, 0.0);
        if let Some(z) = w.iter().find(|z| z.norm() > tol.eps) {
            if z.re < 0.0 {
                w = -w;
            }
        }
        v.set_column(r, &w);
        sigma[r] = s;
        r += 1;
    }
    if r < n {
        let range = Subspace::span_columns(&v.columns(0, r).into_owned(), tol);
        let null = range.complement();
        for k in 0..null.dim().min(n - r) {
            v.set_column(r + k, &null.basis().column(k));
        }
    }

    let mut vs = v.clone();
    for (j, s) in sigma.iter().enumerate() {
        vs.column_mut(j).scale_mut(*s);
    }
    let recon = &vs * v.transpose();
    let svals = svd_sorted(&a).sigma;
    let sv_dev = svals
        .iter()
        .zip(&sigma)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let pa = polar(&a, tol)?;
    let vr = v.columns(0, r).into_owned();
    let checks = vec![
        Check::residual("takagi.reconstruction", spectral_norm(&(recon - &a)), bound),
        Check::residual("takagi.unitary", crate::linalg::gram_residual(&v), tol.eps),
        Check::residual("takagi.singular_values", sv_dev, bound),
        Check::residual(
            "takagi.phase_is_v_vt",
            spectral_norm(&(&vr * vr.transpose() - &pa.phase)),
            tol.eps * 10.0,
        ),
        Check::residual(
            "takagi.modulus",
            spectral_norm(&(conj(&vs) * v.transpose() - &pa.modulus)),
            bound,
        ),
    ];
    Ok(Takagi { v, sigma, checks })
}
