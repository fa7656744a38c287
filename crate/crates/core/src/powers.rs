//! Powers of the doubled matrix `𝔄 = [[0, A], [CAC, 0]]` and the anti-linear
//! operator `AC`.
//!
//! `𝔄^k` is evaluated along independent routes: plain complex block
//! multiplication, alternating products of `A` and `B = CAC`, anti-linear
//! composition of `AC` (giving the predicted block form) and a real
//! realification of every anti-linear factor.

use nalgebra::DMatrix;

use crate::antilinear::{AntiLinearMap, Conjugation};
use crate::error::{CsymError, Result};
use crate::linalg::{conj, spectral_norm, CMat, CVec, Tolerance};

#[derive(Debug, Clone, PartialEq)]
pub struct PowerStep {
    pub k: usize,
    /// `‖𝔄^k - predicted‖ / (1 + ‖A‖)^k`.
    pub block_residual: f64,
    /// Norm of the blocks that must vanish, relative as above.
    pub structural_zero: f64,
    /// Alternating products against the realified path, relative.
    pub path_agreement: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerReport {
    pub n: usize,
    pub steps: Vec<PowerStep>,
}

impl PowerReport {
    pub fn max_block_residual(&self) -> f64 {
        self.steps.iter().map(|s| s.block_residual.max(s.structural_zero)).fold(0.0, f64::max)
    }

    pub fn max_path_disagreement(&self) -> f64 {
        self.steps.iter().map(|s| s.path_agreement).fold(0.0, f64::max)
    }
}

fn check_inputs(a: &CMat, c: &Conjugation) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(CsymError::input("A must be square"));
    }
    if c.dim() != a.nrows() {
        return Err(CsymError::input("conjugation and matrix dimensions differ"));
    }
    Ok(())
}

fn blocks(tl: &CMat, tr: &CMat, bl: &CMat, br: &CMat) -> CMat {
    let n = tl.nrows();
    let mut m = CMat::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(tl);
    m.view_mut((0, n), (n, n)).copy_from(tr);
    m.view_mut((n, 0), (n, n)).copy_from(bl);
    m.view_mut((n, n), (n, n)).copy_from(br);
    m
}

/// The linear matrix of `𝔄`.
pub fn doubled_matrix(a: &CMat, c: &Conjugation) -> CMat {
    let z = CMat::zeros(a.nrows(), a.ncols());
    blocks(&z, a, &c.conjugate_operator(a), &z)
}

/// `(AC)^k` as an anti-linear (odd `k`) or linear (even `k`) matrix.
fn ac_power(a: &CMat, c: &Conjugation, k: usize) -> CMat {
    let m = a * c.matrix();
    let mut acc = CMat::identity(a.nrows(), a.nrows());
    for step in 0..k {
        // Linear `L` then `x ↦ L M conj(x)`; anti-linear `P` then `x ↦ P conj(M) x`.
        acc = if step % 2 == 0 { &acc * &m } else { &acc * conj(&m) };
    }
    acc
}

/// Predicted block form of `𝔄^k`.
pub fn predicted_power(a: &CMat, c: &Conjugation, k: usize) -> CMat {
    let n = a.nrows();
    let z = CMat::zeros(n, n);
    let p = ac_power(a, c, k);
    let kk = c.matrix();
    if k % 2 == 0 {
        let cpc = kk * conj(&p) * conj(kk);
        blocks(&p, &z, &z, &cpc)
    } else {
        // (AC)^k C and C (AC)^k as linear matrices.
        let right = &p * conj(kk);
        let left = kk * conj(&p);
        blocks(&z, &right, &left, &z)
    }
}

/// `𝔄^k` from alternating products of `A` and `B = CAC`.
pub fn alternating_power(a: &CMat, c: &Conjugation, k: usize) -> CMat {
    let n = a.nrows();
    let b = c.conjugate_operator(a);
    let z = CMat::zeros(n, n);
    let mut top = CMat::identity(n, n);
    let mut bottom = CMat::identity(n, n);
    for j in 0..k {
        // Top row starts with A, bottom row with B.
        if j % 2 == 0 {
            top = &top * a;
            bottom = &bottom * &b;
        } else {
            top = &top * &b;
            bottom = &bottom * a;
        }
    }
    if k % 2 == 0 {
        blocks(&top, &z, &z, &bottom)
    } else {
        blocks(&z, &top, &bottom, &z)
    }
}

fn realify_linear(m: &CMat) -> DMatrix<f64> {
    let (r, c) = m.shape();
    DMatrix::from_fn(2 * r, 2 * c, |i, j| {
        let z = m[(i % r, j % c)];
        match (i < r, j < c) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

fn realify_antilinear(m: &CMat) -> DMatrix<f64> {
    let (r, c) = m.shape();
    DMatrix::from_fn(2 * r, 2 * c, |i, j| {
        let z = m[(i % r, j % c)];
        match (i < r, j < c) {
            (true, true) => z.re,
            (false, false) => -z.re,
            _ => z.im,
        }
    })
}

fn complexify(m: &DMatrix<f64>) -> CMat {
    let r = m.nrows() / 2;
    let c = m.ncols() / 2;
    CMat::from_fn(r, c, |i, j| crate::linalg::C64::new(m[(i, j)], m[(r + i, j)]))
}

/// `𝔄^k` computed on `R^{4n}` with `CAC` assembled from the realified
/// anti-linear `C ⊕ C`.
pub fn realified_power(a: &CMat, c: &Conjugation, k: usize) -> CMat {
    let n = a.nrows();
    let z = CMat::zeros(n, n);
    let top = realify_linear(&blocks(&z, a, &z, &z));
    let lower = realify_linear(&blocks(&z, &z, a, &z));
    let kk = c.matrix();
    let cc = realify_antilinear(&blocks(kk, &z, &z, kk));
    let frak = top + &cc * lower * &cc;
    let mut acc = DMatrix::<f64>::identity(4 * n, 4 * n);
    for _ in 0..k {
        acc = &acc * &frak;
    }
    complexify(&acc)
}

fn direct_power(a: &CMat, c: &Conjugation, k: usize) -> CMat {
    let d = doubled_matrix(a, c);
    let mut acc = CMat::identity(d.nrows(), d.ncols());
    for _ in 0..k {
        acc = &acc * &d;
    }
    acc
}

fn off_pattern(m: &CMat, k: usize) -> f64 {
    let n = m.nrows() / 2;
    if k % 2 == 0 {
        spectral_norm(&m.view((0, n), (n, n)).into_owned()).max(spectral_norm(&m.view((n, 0), (n, n)).into_owned()))
    } else {
        spectral_norm(&m.view((0, 0), (n, n)).into_owned()).max(spectral_norm(&m.view((n, n), (n, n)).into_owned()))
    }
}

/// Compares `𝔄^k`, `k = 1..=n`, with its predicted block form.
pub fn doubled_power_blocks(a: &CMat, c: &Conjugation, n: usize) -> Result<PowerReport> {
    check_inputs(a, c)?;
    if n < 1 {
        return Err(CsymError::input("exponent must be at least 1"));
    }
    let base = 1.0 + spectral_norm(a);
    let mut steps = Vec::with_capacity(n);
    for k in 1..=n {
        let scale = base.powi(k as i32);
        let direct = direct_power(a, c, k);
        let predicted = predicted_power(a, c, k);
        let alternating = alternating_power(a, c, k);
        let realified = realified_power(a, c, k);
        steps.push(PowerStep {
            k,
            block_residual: spectral_norm(&(&direct - &predicted)) / scale,
            structural_zero: off_pattern(&direct, k) / scale,
            path_agreement: spectral_norm(&(&alternating - &realified)) / scale,
        });
    }
    Ok(PowerReport { n, steps })
}

/// Deviations `(even, odd)` in
/// `‖𝔄^{2n}(x, y)‖ = (‖(AC)^{2n}x‖² + ‖(AC)^{2n}Cy‖²)^{1/2}` and
/// `‖𝔄^{2n+1}(x, y)‖ = (‖(AC)^{2n+1}Cy‖² + ‖(AC)^{2n+1}x‖²)^{1/2}`.
pub fn power_norm_identities(a: &CMat, c: &Conjugation, x: &CVec, y: &CVec, n: usize) -> Result<(f64, f64)> {
    check_inputs(a, c)?;
    let d = a.nrows();
    if x.len() != d || y.len() != d {
        return Err(CsymError::input("vector dimensions differ from the matrix"));
    }
    let mut xy = CVec::zeros(2 * d);
    xy.rows_mut(0, d).copy_from(x);
    xy.rows_mut(d, d).copy_from(y);
    let ac = AntiLinearMap::new(a * c.matrix());
    let iterate = |v: &CVec, k: usize| -> Result<CVec> {
        let mut w = v.clone();
        for _ in 0..k {
            w = ac.apply(&w)?;
        }
        Ok(w)
    };
    let cy = c.apply(y);
    let mut out = [0.0; 2];
    for (slot, k) in [2 * n, 2 * n + 1].into_iter().enumerate() {
        let lhs = (direct_power(a, c, k) * &xy).norm();
        let rhs = (iterate(x, k)?.norm_squared() + iterate(&cy, k)?.norm_squared()).sqrt();
        out[slot] = (lhs - rhs).abs();
    }
    Ok((out[0], out[1]))
}

#[derive(Debug, Clone, PartialEq)]
pub struct QaReport {
    /// `‖(AC)^k x‖^{-1/k}`; `None` marks `(AC)^k x = 0` within tolerance.
    pub terms: Vec<Option<f64>>,
    /// Partial sums; infinite from the first vanishing power on.
    pub partial_sums: Vec<f64>,
    pub diverged_at: Option<usize>,
    /// Smallest `M` with `‖(AC)^k x‖ <= M^k k!` for the computed `k`.
    pub analytic_bound: f64,
}

pub fn qa_partial_sums(a: &CMat, c: &Conjugation, x: &CVec, n: usize, tol: Tolerance) -> Result<QaReport> {
    check_inputs(a, c)?;
    if x.len() != a.nrows() {
        return Err(CsymError::input("vector dimension differs from the matrix"));
    }
    if x.norm() <= tol.eps {
        return Err(CsymError::input("x must be nonzero"));
    }
    let ac = AntiLinearMap::new(a * c.matrix());
    let mut w = x.clone();
    let mut terms = Vec::with_capacity(n);
    let mut partial_sums = Vec::with_capacity(n);
    let mut sum = 0.0;
    let mut diverged_at = None;
    let mut analytic_bound: f64 = 0.0;
    let mut log_fact = 0.0;
    for k in 1..=n {
        w = ac.apply(&w)?;
        let nk = w.norm();
        log_fact += (k as f64).ln();
        if nk <= tol.eps {
            terms.push(None);
            diverged_at.get_or_insert(k);
            sum = f64::INFINITY;
        } else {
            let t = nk.powf(-1.0 / k as f64);
            terms.push(Some(t));
            sum += t;
            analytic_bound = analytic_bound.max(((nk.ln() - log_fact) / k as f64).exp());
        }
        partial_sums.push(sum);
    }
    Ok(QaReport {
        terms,
        partial_sums,
        diverged_at,
        analytic_bound,
    })
}
