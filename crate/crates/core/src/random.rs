//! Seeded generators for random test instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::antilinear::Conjugation;
use crate::linalg::{CMat, CVec, Subspace, Tolerance, C64};

/// Deterministic sampler; identical seeds give identical streams.
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn index(&mut self, upper: usize) -> usize {
        self.rng.random_range(0..upper)
    }

    pub fn range(&mut self, lo: usize, hi_inclusive: usize) -> usize {
        self.rng.random_range(lo..=hi_inclusive)
    }

    /// Standard complex Gaussian, `E|z|^2 = 1`.
    pub fn gaussian(&mut self) -> C64 {
        let re: f64 = self.rng.sample(StandardNormal);
        let im: f64 = self.rng.sample(StandardNormal);
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }

    pub fn gaussian_vector(&mut self, n: usize) -> CVec {
        CVec::from_fn(n, |_, _| self.gaussian())
    }

    pub fn gaussian_matrix(&mut self, rows: usize, cols: usize) -> CMat {
        CMat::from_fn(rows, cols, |_, _| self.gaussian())
    }

    pub fn real_matrix(&mut self, rows: usize, cols: usize) -> CMat {
        CMat::from_fn(rows, cols, |_, _| {
            let x: f64 = self.rng.sample(StandardNormal);
            C64::new(x, 0.0)
        })
    }

    pub fn unit_vector(&mut self, n: usize) -> CVec {
        let v = self.gaussian_vector(n);
        let nv = v.norm();
        v / C64::new(nv, 0.0)
    }

    /// Haar-distributed unitary from the QR factorization of a Gaussian matrix.
    pub fn unitary(&mut self, n: usize) -> CMat {
        if n == 0 {
            return CMat::zeros(0, 0);
        }
        let g = self.gaussian_matrix(n, n);
        let qr = g.qr();
        let mut q = qr.q();
        let r = qr.r();
        for j in 0..n {
            let d = r[(j, j)];
            let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
            let col = q.column(j) * phase;
            q.set_column(j, &col);
        }
        q
    }

    /// `K = Q Q^T` for a Haar unitary `Q`; automatically unitary and symmetric.
    pub fn conjugation(&mut self, n: usize) -> Conjugation {
        let q = self.unitary(n);
        let k = &q * q.transpose();
        Conjugation::new(k, Tolerance::default()).expect("Q Q^T is a conjugation")
    }

    pub fn subspace(&mut self, n: usize, k: usize, tol: Tolerance) -> Subspace {
        let m = self.gaussian_matrix(n, k);
        Subspace::span_columns(&m, tol)
    }

    pub fn random_subspace(&mut self, n: usize, k: usize, tol: Tolerance) -> Subspace {
        self.subspace(n, k, tol)
    }

    pub fn symmetric_matrix(&mut self, n: usize) -> CMat {
        let g = self.gaussian_matrix(n, n);
        (&g + g.transpose()) * C64::new(0.5, 0.0)
    }

    /// A matrix `A = K S` with `S = S^T`; such `A` satisfy `C A C = A^*`
    /// for the conjugation `x -> K conj(x)`.
    pub fn c_selfadjoint_matrix(&mut self, c: &Conjugation) -> CMat {
        let s = self.symmetric_matrix(c.dim());
        c.matrix() * s
    }
}
