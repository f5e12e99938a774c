//! Oracles shared by the integration tests. Nothing here calls into the
//! library's numerics, so agreement is evidence rather than tautology.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

pub struct TestRng(ChaCha8Rng);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        TestRng(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let u = (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        lo + (hi - lo) * u
    }

    pub fn index(&mut self, lo: usize, hi_inclusive: usize) -> usize {
        lo + (self.0.next_u64() % (hi_inclusive - lo + 1) as u64) as usize
    }

    /// Marsaglia polar method, a different transform from the library's.
    pub fn normal(&mut self) -> f64 {
        loop {
            let a = self.uniform(-1.0, 1.0);
            let b = self.uniform(-1.0, 1.0);
            let s = a * a + b * b;
            if s > 0.0 && s < 1.0 {
                return a * (-2.0 * s.ln() / s).sqrt();
            }
        }
    }

    pub fn vector(&mut self, n: usize, lo: f64, hi: f64) -> DVector<f64> {
        DVector::from_fn(n, |_, _| self.uniform(lo, hi))
    }

    pub fn matrix(&mut self, n: usize, k: usize, lo: f64, hi: f64) -> DMatrix<f64> {
        DMatrix::from_fn(n, k, |_, _| self.uniform(lo, hi))
    }

    /// Random `n x k` matrix with a boosted leading diagonal, so its
    /// condition number stays modest.
    pub fn well_conditioned(&mut self, n: usize, k: usize) -> DMatrix<f64> {
        self.matrix(n, k, -1.0, 1.0) + DMatrix::from_fn(n, k, |i, j| if i == j { 3.0 } else { 0.0 })
    }
}

/// Dense `U (U^T U)^{-1} U^T x`.
pub fn dense_projection(u: &DMatrix<f64>, x: &DVector<f64>) -> DVector<f64> {
    let gram = u.transpose() * u;
    let inv = gram.try_inverse().expect("well-conditioned basis");
    u * inv * u.transpose() * x
}

/// Minimize `f` over a box by repeated grid refinement. Each round scans
/// `points` values per axis and recentres a window of two cells around
/// the best node, stopping once the cell width falls below `resolution`.
pub fn grid_argmin(f: impl Fn(&[f64]) -> f64, lo: &[f64], hi: &[f64], points: usize, resolution: f64) -> Vec<f64> {
    let dim = lo.len();
    let (mut lo, mut hi) = (lo.to_vec(), hi.to_vec());
    let mut best = lo.clone();
    loop {
        let cell: Vec<f64> = (0..dim).map(|d| (hi[d] - lo[d]) / (points - 1) as f64).collect();
        let mut best_val = f64::INFINITY;
        let total = points.pow(dim as u32);
        let mut node = vec![0.0; dim];
        for flat in 0..total {
            let mut rem = flat;
            for d in 0..dim {
                node[d] = lo[d] + (rem % points) as f64 * cell[d];
                rem /= points;
            }
            let v = f(&node);
            if v < best_val {
                best_val = v;
                best.copy_from_slice(&node);
            }
        }
        if cell.iter().all(|c| *c < resolution) {
            return best;
        }
        for d in 0..dim {
            lo[d] = best[d] - 2.0 * cell[d];
            hi[d] = best[d] + 2.0 * cell[d];
        }
    }
}

/// Central-difference Jacobian with step `cbrt(eps) (1 + |t|)`.
pub fn fd_jacobian(f: impl Fn(&[f64]) -> Vec<f64>, theta: &[f64]) -> DMatrix<f64> {
    let base = f(theta);
    let mut out = DMatrix::zeros(base.len(), theta.len());
    for j in 0..theta.len() {
        let h = f64::EPSILON.cbrt() * (1.0 + theta[j].abs());
        let mut p = theta.to_vec();
        let mut m = theta.to_vec();
        p[j] += h;
        m[j] -= h;
        let (fp, fm) = (f(&p), f(&m));
        for i in 0..base.len() {
            out[(i, j)] = (fp[i] - fm[i]) / (p[j] - m[j]);
        }
    }
    out
}

/// Empirical quantile by linear interpolation of the order statistics.
pub fn quantile(samples: &mut [f64], p: f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let pos = p * (samples.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    samples[lo] + (pos - lo as f64) * (samples[hi] - samples[lo])
}

pub fn max_rel(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs() / y.abs().max(1.0)).fold(0.0, f64::max)
}
