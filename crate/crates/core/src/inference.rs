//! Distributional geometry of least squares estimates.
//!
//! With `x_obs = x* + eps`, `eps ~ N(0, sigma^2 I)` and a linear model of
//! rank `q`, the error splits as `eps = xi + e` with the flaw `xi = x_hat - x*`
//! in the model span and the residual `e = x_obs - x_hat` orthogonal to it.
//! Their scaled squared norms are chi-square with `n`, `q` and `n - q`
//! degrees of freedom, and `(|xi|^2 / q) / (|e|^2 / (n - q))` is
//! `F(q, n - q)`. For nonlinear models the same statements hold on the
//! tangent space at the estimate, approximately.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimate::{Estimate, TangentFrame};
use crate::io::{ser_mat, ser_vec};
use crate::model::{second_derivative, slice_multiply, ModelFunction, Parameter};

/// Absolute tolerance of quantile inversion.
pub const QUANTILE_TOLERANCE: f64 = 1e-10;
/// Number of directions probed by [`curvature_diagnostic`].
pub const CURVATURE_DIRECTIONS: usize = 100;

#[derive(Debug, Clone, Serialize)]
pub struct Decomposition {
    /// `flaw + residual`; equals `x_obs - x_star` up to rounding.
    #[serde(serialize_with = "ser_vec")]
    pub error: DVector<f64>,
    #[serde(serialize_with = "ser_vec")]
    pub residual: DVector<f64>,
    #[serde(serialize_with = "ser_vec")]
    pub flaw: DVector<f64>,
    pub error_norm2: f64,
    pub flaw_norm2: f64,
    pub residual_norm2: f64,
    pub sigma2: f64,
}

impl Decomposition {
    /// Squared norms divided by `sigma2`: (error, flaw, residual).
    pub fn scaled_norms(&self) -> (f64, f64, f64) {
        (self.error_norm2 / self.sigma2, self.flaw_norm2 / self.sigma2, self.residual_norm2 / self.sigma2)
    }
}

/// Split the observation error into flaw and residual.
///
/// The error vector is assembled as `flaw + residual`, so additivity holds
/// bit for bit. Whenever each component of `x_obs`, `x_hat`, `x_star` lies
/// within a factor of two of the others, both differences are exact and the
/// stored error is also exactly `x_obs - x_star`.
pub fn decompose(x_obs: &DVector<f64>, x_hat: &DVector<f64>, x_star: &DVector<f64>, sigma2: f64) -> Result<Decomposition> {
    let n = x_obs.len();
    if x_hat.len() != n || x_star.len() != n {
        return Err(Error::Shape(format!("lengths {} / {} / {}", n, x_hat.len(), x_star.len())));
    }
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::Invalid(format!("sigma2 must be positive, got {sigma2}")));
    }
    let residual = x_obs - x_hat;
    let flaw = x_hat - x_star;
    let error = &flaw + &residual;
    Ok(Decomposition {
        error_norm2: error.norm_squared(),
        flaw_norm2: flaw.norm_squared(),
        residual_norm2: residual.norm_squared(),
        error,
        residual,
        flaw,
        sigma2,
    })
}

/// Coordinates of `v` in the rotated frame: (tangent block, complement block).
pub fn rotate(frame: &TangentFrame, v: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
    if v.len() != frame.n() {
        return Err(Error::Shape(format!("vector of length {} for frame in R^{}", v.len(), frame.n())));
    }
    Ok((frame.tangent_onb.tr_mul(v), frame.complement_onb.tr_mul(v)))
}

// ---------------------------------------------------------------------------
// special functions

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Gamma(x)` for `x > 0` (Lanczos, reflection below 1/2).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

const SF_EPS: f64 = 1e-16;
const SF_TINY: f64 = 1e-300;
const SF_MAX_ITER: usize = 10_000;

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn regularized_gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    let log_prefix = a * x.ln() - x - ln_gamma(a);
    if x < a + 1.0 {
        // series
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut ap = a;
        for _ in 0..SF_MAX_ITER {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term.abs() < sum.abs() * SF_EPS {
                break;
            }
        }
        (sum * log_prefix.exp()).min(1.0)
    } else {
        // continued fraction for Q, modified Lentz
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / SF_TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..SF_MAX_ITER {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < SF_TINY {
                d = SF_TINY;
            }
            c = b + an / c;
            if c.abs() < SF_TINY {
                c = SF_TINY;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < SF_EPS {
                break;
            }
        }
        (1.0 - log_prefix.exp() * h).max(0.0)
    }
}

fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < SF_TINY {
        d = SF_TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..SF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < SF_TINY {
            d = SF_TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < SF_TINY {
            c = SF_TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < SF_TINY {
            d = SF_TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < SF_TINY {
            c = SF_TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < SF_EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn regularized_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let log_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = log_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(a, b, x) / a
    } else {
        1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b
    }
}

fn check_dof(name: &str, k: u32) -> Result<()> {
    if k == 0 {
        return Err(Error::Domain(format!("{name} degrees of freedom must be at least 1")));
    }
    Ok(())
}

fn check_probability(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("probability must lie in (0, 1), got {p}")));
    }
    Ok(())
}

fn check_support(x: f64) -> Result<()> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::Domain(format!("argument must be non-negative, got {x}")));
    }
    Ok(())
}

pub fn chi2_cdf(k: u32, x: f64) -> Result<f64> {
    check_dof("chi-square", k)?;
    check_support(x)?;
    Ok(regularized_gamma_p(0.5 * k as f64, 0.5 * x))
}

fn chi2_pdf(k: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let h = 0.5 * k as f64;
    ((h - 1.0) * x.ln() - 0.5 * x - h * 2f64.ln() - ln_gamma(h)).exp()
}

pub fn chi2_quantile(k: u32, p: f64) -> Result<f64> {
    check_dof("chi-square", k)?;
    check_probability(p)?;
    Ok(invert_cdf(|x| regularized_gamma_p(0.5 * k as f64, 0.5 * x), |x| chi2_pdf(k, x), p, k as f64))
}

pub fn f_cdf(d1: u32, d2: u32, x: f64) -> Result<f64> {
    check_dof("numerator", d1)?;
    check_dof("denominator", d2)?;
    check_support(x)?;
    Ok(f_cdf_raw(d1 as f64, d2 as f64, x))
}

fn f_cdf_raw(d1: f64, d2: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    regularized_beta(0.5 * d1, 0.5 * d2, d1 * x / (d1 * x + d2))
}

fn f_pdf(d1: f64, d2: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let (a, b) = (0.5 * d1, 0.5 * d2);
    let log = a * (d1 / d2).ln() + (a - 1.0) * x.ln() - (a + b) * (1.0 + d1 * x / d2).ln() - (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b));
    log.exp()
}

pub fn f_quantile(d1: u32, d2: u32, p: f64) -> Result<f64> {
    check_dof("numerator", d1)?;
    check_dof("denominator", d2)?;
    check_probability(p)?;
    let (a, b) = (d1 as f64, d2 as f64);
    Ok(invert_cdf(|x| f_cdf_raw(a, b, x), |x| f_pdf(a, b, x), p, 1.0))
}

/// Bracketed bisection on `[0, inf)` followed by a guarded Newton polish.
fn invert_cdf(cdf: impl Fn(f64) -> f64, pdf: impl Fn(f64) -> f64, p: f64, guess: f64) -> f64 {
    let mut lo = 0.0;
    let mut hi = guess.max(1.0);
    while cdf(hi) < p {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return f64::INFINITY;
        }
    }
    for _ in 0..200 {
        if hi - lo <= 0.25 * QUANTILE_TOLERANCE {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..4 {
        let dens = pdf(x);
        if !(dens > 0.0 && dens.is_finite()) {
            break;
        }
        let next = x - (cdf(x) - p) / dens;
        if !(next >= lo && next <= hi) {
            break;
        }
        x = next;
    }
    x
}

// ---------------------------------------------------------------------------
// flaw statistics

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlawStatistic {
    /// `(|xi|^2 / q) / (|e|^2 / (n - q))`, distributed `F(q, n - q)`.
    pub normalized: f64,
    /// `|xi|^2 / |e|^2` without degree-of-freedom scaling.
    pub raw: f64,
}

fn check_counts(q: usize, n: usize) -> Result<()> {
    if q == 0 || n <= q {
        return Err(Error::Domain(format!("need n > q >= 1, got n = {n}, q = {q}")));
    }
    Ok(())
}

fn dof(v: usize) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::Domain(format!("{v} degrees of freedom is too many")))
}

pub fn flaw_statistic(decomp: &Decomposition, q: usize, n: usize) -> Result<FlawStatistic> {
    check_counts(q, n)?;
    if decomp.residual_norm2 == 0.0 {
        return Err(Error::Degenerate("residual norm is zero".into()));
    }
    let raw = decomp.flaw_norm2 / decomp.residual_norm2;
    Ok(FlawStatistic { normalized: raw * (n - q) as f64 / q as f64, raw })
}

/// Upper `(1 - alpha)` bound on `|xi|` inferred from `|e|^2`.
pub fn flaw_bound(residual_norm2: f64, q: usize, n: usize, alpha: f64) -> Result<f64> {
    check_counts(q, n)?;
    check_probability(alpha)?;
    check_support(residual_norm2)?;
    let fq = f_quantile(dof(q)?, dof(n - q)?, 1.0 - alpha)?;
    Ok((q as f64 / (n - q) as f64 * fq * residual_norm2).sqrt())
}

/// Upper `(1 - alpha)` bound on `|xi|` when `sigma^2` is known.
pub fn flaw_bound_known_sigma(sigma2: f64, q: usize, alpha: f64) -> Result<f64> {
    if q == 0 {
        return Err(Error::Domain("q must be at least 1".into()));
    }
    check_probability(alpha)?;
    check_support(sigma2)?;
    Ok((sigma2 * chi2_quantile(dof(q)?, 1.0 - alpha)?).sqrt())
}

/// `{theta : (theta - center)^T S (theta - center) <= radius2}`.
#[derive(Debug, Clone, Serialize)]
pub struct ConfidenceRegion {
    pub center: Parameter,
    #[serde(serialize_with = "ser_mat")]
    pub shape_matrix: DMatrix<f64>,
    pub radius2: f64,
    pub alpha: f64,
    pub s2: f64,
}

impl ConfidenceRegion {
    pub fn quadratic_form(&self, theta: &DVector<f64>) -> f64 {
        let d = theta - self.center.values();
        d.dot(&(&self.shape_matrix * &d))
    }

    pub fn contains(&self, theta: &DVector<f64>) -> bool {
        self.quadratic_form(theta) <= self.radius2
    }

    /// Per-axis extent of the ellipsoid (its shadow on each coordinate).
    pub fn marginal_intervals(&self) -> Result<Vec<(f64, f64)>> {
        let cov = self
            .shape_matrix
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Rank("shape matrix is not positive definite".into()))?
            .inverse();
        Ok((0..self.center.len())
            .map(|j| {
                let half = (self.radius2 * cov[(j, j)]).sqrt();
                (self.center[j] - half, self.center[j] + half)
            })
            .collect())
    }
}

fn region_parts(frame: &TangentFrame, estimate: &Estimate, alpha: f64) -> Result<(DMatrix<f64>, usize, usize)> {
    let (n, q) = (frame.n(), frame.q());
    check_counts(q, n)?;
    check_probability(alpha)?;
    if !estimate.converged {
        return Err(Error::Numerical("confidence region needs a converged estimate".into()));
    }
    if estimate.theta_hat.len() != q || estimate.x_hat.len() != n {
        return Err(Error::Shape("estimate does not match the tangent frame".into()));
    }
    if frame.rank < q {
        return Err(Error::Rank(format!("J^T J singular: Jacobian rank {} < {}", frame.rank, q)));
    }
    let shape = frame.jacobian.tr_mul(&frame.jacobian);
    if shape.clone().cholesky().is_none() {
        return Err(Error::Rank("J^T J is not positive definite".into()));
    }
    Ok((shape, n, q))
}

/// Linearization ellipsoid with `s^2 = sse / (n - q)` and an F threshold.
pub fn parameter_region(frame: &TangentFrame, estimate: &Estimate, alpha: f64) -> Result<ConfidenceRegion> {
    let (n, q) = (frame.n(), frame.q());
    check_counts(q, n)?;
    check_probability(alpha)?;
    let fq = f_quantile(dof(q)?, dof(n - q)?, 1.0 - alpha)?;
    region_with_quantile(frame, estimate, alpha, fq)
}

/// [`parameter_region`] with `f_quantile(q, n - q, 1 - alpha)` supplied.
pub(crate) fn region_with_quantile(frame: &TangentFrame, estimate: &Estimate, alpha: f64, fq: f64) -> Result<ConfidenceRegion> {
    let (shape, n, q) = region_parts(frame, estimate, alpha)?;
    let s2 = estimate.sse / (n - q) as f64;
    let radius2 = q as f64 * s2 * fq;
    Ok(ConfidenceRegion { center: estimate.theta_hat.clone(), shape_matrix: shape, radius2, alpha, s2 })
}

/// Same ellipsoid with `sigma^2` known: chi-square threshold `sigma^2 chi2_q(1 - alpha)`.
pub fn parameter_region_known_sigma(frame: &TangentFrame, estimate: &Estimate, alpha: f64, sigma2: f64) -> Result<ConfidenceRegion> {
    let (shape, _, q) = region_parts(frame, estimate, alpha)?;
    check_support(sigma2)?;
    let radius2 = sigma2 * chi2_quantile(dof(q)?, 1.0 - alpha)?;
    Ok(ConfidenceRegion { center: estimate.theta_hat.clone(), shape_matrix: shape, radius2, alpha, s2: sigma2 })
}

/// Deterministic unit directions in `R^q`: `+-1` for `q = 1`, an even
/// half-circle grid for `q = 2`, normalized Halton points otherwise.
pub fn probe_directions(q: usize, count: usize) -> Vec<DVector<f64>> {
    match q {
        0 => Vec::new(),
        1 => (0..count).map(|i| DVector::from_element(1, if i % 2 == 0 { 1.0 } else { -1.0 })).collect(),
        2 => (0..count)
            .map(|i| {
                let a = PI * i as f64 / count as f64;
                DVector::from_column_slice(&[a.cos(), a.sin()])
            })
            .collect(),
        _ => {
            const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];
            let mut out = Vec::with_capacity(count);
            let mut idx = 1u64;
            while out.len() < count {
                let v = DVector::from_iterator(
                    q,
                    (0..q).map(|j| 2.0 * radical_inverse(idx, PRIMES[j % PRIMES.len()] + 2 * (j / PRIMES.len()) as u64) - 1.0),
                );
                idx += 1;
                let norm = v.norm();
                if norm > 1e-3 {
                    out.push(v / norm);
                }
            }
            out
        }
    }
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base) as f64 * inv;
        i /= base;
        inv /= base as f64;
    }
    out
}

/// Largest normal-to-tangent curvature relative to the tangent speed,
/// `max_d |(I - P_T)(d^T x'' d)| / |J d|^2` over [`CURVATURE_DIRECTIONS`]
/// deterministic unit directions. Zero for linear models.
pub fn curvature_diagnostic(model: &ModelFunction, frame: &TangentFrame) -> Result<f64> {
    if frame.rank < frame.q() {
        return Err(Error::Rank(format!("Jacobian rank {} < {}", frame.rank, frame.q())));
    }
    let second = second_derivative(model, &frame.theta_hat)?;
    let mut worst = 0.0_f64;
    for d in probe_directions(frame.q(), CURVATURE_DIRECTIONS) {
        let left = DMatrix::from_row_slice(1, d.len(), d.as_slice());
        let acc = slice_multiply(Some(&left), &second, Some(&DMatrix::from_column_slice(d.len(), 1, d.as_slice())))?
            .squeeze()?;
        let acc = DVector::from_column_slice(acc.as_slice());
        let normal = frame.complement_onb.tr_mul(&acc).norm();
        let speed2 = (&frame.jacobian * &d).norm_squared();
        if speed2 == 0.0 {
            return Err(Error::Rank("Jacobian annihilates a probe direction".into()));
        }
        worst = worst.max(normal / speed2);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi2_two_is_exponential() {
        for i in 0..200 {
            let x = i as f64 * 0.1;
            assert!((chi2_cdf(2, x).unwrap() - (1.0 - (-x / 2.0).exp())).abs() < 1e-12);
        }
        assert!((chi2_quantile(2, 0.5).unwrap() - 2.0 * 2f64.ln()).abs() < 1e-8);
    }

    #[test]
    fn cdf_limits() {
        for k in [1, 2, 5, 30] {
            assert_eq!(chi2_cdf(k, 0.0).unwrap(), 0.0);
            assert!((chi2_cdf(k, 1e4).unwrap() - 1.0).abs() < 1e-15);
            assert_eq!(f_cdf(k, 3, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn f_median_of_equal_dof_is_one() {
        for d in [1, 2, 3, 8, 25] {
            assert!((f_quantile(d, d, 0.5).unwrap() - 1.0).abs() < 1e-9, "d = {d}");
        }
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(chi2_cdf(0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(chi2_cdf(2, -1.0), Err(Error::Domain(_))));
        assert!(matches!(chi2_quantile(2, 1.0), Err(Error::Domain(_))));
        assert!(matches!(f_quantile(2, 0, 0.5), Err(Error::Domain(_))));
        assert!(matches!(flaw_bound(1.0, 2, 2, 0.05), Err(Error::Domain(_))));
        assert!(matches!(flaw_bound(1.0, 2, 5, 1.5), Err(Error::Domain(_))));
    }

    #[test]
    fn perfect_world_decomposition() {
        let x = DVector::from_column_slice(&[1.0, 2.0]);
        let d = decompose(&x, &x, &x, 1.0).unwrap();
        assert_eq!(d.error_norm2 + d.flaw_norm2 + d.residual_norm2, 0.0);
        assert!(decompose(&x, &x, &DVector::zeros(3), 1.0).is_err());
        assert!(decompose(&x, &x, &x, 0.0).is_err());
    }

    #[test]
    fn flaw_statistic_cases() {
        let z = DVector::zeros(4);
        let x_obs = DVector::from_column_slice(&[1.0, 1.0, 0.0, 0.0]);
        let d = decompose(&x_obs, &z, &z, 1.0).unwrap();
        assert_eq!(flaw_statistic(&d, 2, 4).unwrap().normalized, 0.0);

        // |xi|^2 = q = 1, |e|^2 = n - q = 3
        let x_star = DVector::from_column_slice(&[0.0, 0.0, 0.0, 0.0]);
        let x_hat = DVector::from_column_slice(&[1.0, 0.0, 0.0, 0.0]);
        let x_obs = DVector::from_column_slice(&[1.0, 1.0, 1.0, 1.0]);
        let d = decompose(&x_obs, &x_hat, &x_star, 1.0).unwrap();
        let s = flaw_statistic(&d, 1, 4).unwrap();
        assert_eq!(s.normalized, 1.0);
        assert!((s.raw - 1.0 / 3.0).abs() < 1e-15);

        let d = decompose(&x_hat, &x_hat, &x_star, 1.0).unwrap();
        assert!(matches!(flaw_statistic(&d, 1, 4), Err(Error::Degenerate(_))));
    }

    #[test]
    fn flaw_bound_shrinks_with_alpha() {
        assert_eq!(flaw_bound(0.0, 2, 10, 0.05).unwrap(), 0.0);
        let b: Vec<f64> = [0.01, 0.05, 0.10].iter().map(|&a| flaw_bound(8.0, 2, 10, a).unwrap()).collect();
        assert!(b[0] > b[1] && b[1] > b[2]);
        let known = flaw_bound_known_sigma(1.0, 2, 0.05).unwrap();
        assert!((known * known - chi2_quantile(2, 0.95).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn probe_directions_are_unit() {
        for q in 1..5 {
            let dirs = probe_directions(q, CURVATURE_DIRECTIONS);
            assert_eq!(dirs.len(), CURVATURE_DIRECTIONS);
            assert!(dirs.iter().all(|d| (d.norm() - 1.0).abs() < 1e-12));
        }
    }
}
