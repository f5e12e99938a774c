//! Seeded realization of the random variables behind an estimation problem.
//!
//! An outcome is the pair `(seed, replicate_index)`. Fixing it fixes every
//! random variable of the model family at once: the noise draw, the
//! observation, the estimate, its residual and flaw, and points of the
//! tangent space at the estimate.
//!
//! # Random stream
//!
//! Replicate `r` under seed `s` reads ChaCha20 with key `s` (little-endian
//! in the first 8 key bytes, remaining bytes zero) on stream `r`, so
//! replicates never share keystream. Each pair of 64-bit words `(w1, w2)`
//! becomes uniforms `u = ((w >> 11) + 0.5) * 2^-53` in `(0, 1)` and then two
//! standard normals by Box-Muller:
//! `sqrt(-2 ln u1) cos(2 pi u2)`, `sqrt(-2 ln u1) sin(2 pi u2)`.
//! An odd trailing deviate discards the sine half.
//!
//! The noise is snapped so that `x_obs = x_star + eps` round-trips:
//! `eps = fl(fl(x_star + sigma z) - x_star)`, which makes both
//! `x_obs - eps == x_star` and `x_obs - x_star == eps` exact whenever
//! `|x_star_i| >= |sigma z_i|`.

use std::f64::consts::PI;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimate::{fit_linear, fit_nonlinear, tangent_frame, Estimate, FitOptions, TangentFrame};
use crate::inference::{chi2_cdf, decompose, f_cdf, f_quantile, region_with_quantile};
use crate::model::{evaluate, ModelFunction, Parameter};

/// Smallest study size accepted by [`monte_carlo_study`].
pub const MIN_REPLICATES: usize = 100;
/// Asymptotic two-sided 5% Kolmogorov-Smirnov critical value times sqrt(R).
pub const KS_CRITICAL_5PCT: f64 = 1.36;
/// Slack applied to the KS critical value for fitted statistics.
pub const KS_SLACK: f64 = 1.5;
/// Largest tolerated fraction of excluded (non-converged) replicates.
pub const MAX_EXCLUDED_FRACTION: f64 = 0.01;

/// `R` standard normals for outcome `(seed, index)`.
pub fn standard_normals(seed: u64, index: u64, count: usize) -> DVector<f64> {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    let mut rng = ChaCha20Rng::from_seed(key);
    rng.set_stream(index);
    let mut out = DVector::zeros(count);
    let mut i = 0;
    while i < count {
        let u1 = unit_open(rng.next_u64());
        let u2 = unit_open(rng.next_u64());
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * PI * u2;
        out[i] = radius * angle.cos();
        if i + 1 < count {
            out[i + 1] = radius * angle.sin();
        }
        i += 2;
    }
    out
}

/// Uniforms in `(0, 1)` from the same keyed stream layout.
pub fn uniforms(seed: u64, index: u64, count: usize) -> Vec<f64> {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    let mut rng = ChaCha20Rng::from_seed(key);
    rng.set_stream(index);
    (0..count).map(|_| unit_open(rng.next_u64())).collect()
}

fn unit_open(word: u64) -> f64 {
    ((word >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// `X_obs = X(theta*) + eps`, `eps ~ N(0, sigma^2 I)`, with the outcome
/// indexed by `seed`.
#[derive(Debug, Clone)]
pub struct RandomVariableModel {
    pub model: ModelFunction,
    pub theta_star: Parameter,
    pub sigma: f64,
    pub seed: u64,
    x_star: DVector<f64>,
}

impl RandomVariableModel {
    pub fn new(model: ModelFunction, theta_star: Parameter, sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::Invalid(format!("sigma must be finite and non-negative, got {sigma}")));
        }
        let x_star = evaluate(&model, &theta_star)?;
        Ok(RandomVariableModel { model, theta_star, sigma, seed, x_star })
    }

    /// `x(theta*)`.
    pub fn state(&self) -> &DVector<f64> {
        &self.x_star
    }

    /// The noise realization for a replicate, snapped to the state's grid.
    pub fn noise(&self, replicate_index: u64) -> DVector<f64> {
        let z = standard_normals(self.seed, replicate_index, self.x_star.len());
        DVector::from_iterator(
            z.len(),
            self.x_star.iter().zip(z.iter()).map(|(&a, &zi)| (a + self.sigma * zi) - a),
        )
    }

    /// Starting point used for nonlinear fits: `theta* + 0.1 |theta*|`,
    /// pulled inside the parameter box.
    pub fn fit_start(&self) -> Parameter {
        let bumped = self.theta_star.map(|t| t + 0.1 * t.abs());
        let inside = if self.model.contains(&bumped) { bumped } else { self.model.bounds().clamp_inside(&bumped) };
        Parameter::new(inside).unwrap_or_else(|_| self.theta_star.clone())
    }

    /// Least squares estimate for one observation vector.
    pub fn fit(&self, x_obs: &DVector<f64>, opts: &FitOptions) -> Result<Estimate> {
        if self.model.is_linear() {
            fit_linear(self.model.design().matrix(), x_obs)
        } else {
            fit_nonlinear(&self.model, x_obs, &self.fit_start(), opts)
        }
    }
}

/// `x~^r = x(theta*) + sigma z^r`.
pub fn sample_outcome(rv: &RandomVariableModel, replicate_index: u64) -> DVector<f64> {
    rv.state() + rv.noise(replicate_index)
}

/// Random variables that can be realized for an outcome.
#[derive(Debug, Clone, PartialEq)]
pub enum RandomVariable {
    XStar,
    Epsilon,
    XObs,
    /// `X(theta)` for a fixed parameter (zero variance).
    XAt(Parameter),
    XHat,
    Residual,
    Flaw,
    /// `X_hat + J eta`, a point of the tangent space at the estimate.
    Tangent(DVector<f64>),
}

impl FromStr for RandomVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let args = |inner: &str| -> Result<Vec<f64>> {
            inner
                .split(',')
                .map(|t| t.trim().parse::<f64>().map_err(|_| Error::UnknownVariable(s.to_string())))
                .collect()
        };
        match s {
            "X_star" => Ok(RandomVariable::XStar),
            "epsilon" => Ok(RandomVariable::Epsilon),
            "X_obs" => Ok(RandomVariable::XObs),
            "X_hat" => Ok(RandomVariable::XHat),
            "residual" => Ok(RandomVariable::Residual),
            "flaw" => Ok(RandomVariable::Flaw),
            _ => {
                if let Some(inner) = s.strip_prefix("X_at(").and_then(|r| r.strip_suffix(')')) {
                    Ok(RandomVariable::XAt(Parameter::from_slice(&args(inner)?)?))
                } else if let Some(inner) = s.strip_prefix("tangent(").and_then(|r| r.strip_suffix(')')) {
                    Ok(RandomVariable::Tangent(DVector::from_vec(args(inner)?)))
                } else {
                    Err(Error::UnknownVariable(s.to_string()))
                }
            }
        }
    }
}

/// Every random variable of the family evaluated at one outcome.
#[derive(Debug, Clone)]
pub struct Realization {
    pub replicate_index: u64,
    pub x_star: DVector<f64>,
    pub epsilon: DVector<f64>,
    pub x_obs: DVector<f64>,
    pub estimate: Estimate,
    pub frame: TangentFrame,
}

impl Realization {
    pub fn new(rv: &RandomVariableModel, replicate_index: u64, opts: &FitOptions) -> Result<Self> {
        let x_star = rv.state().clone();
        let epsilon = rv.noise(replicate_index);
        let x_obs = &x_star + &epsilon;
        let estimate = rv.fit(&x_obs, opts)?;
        let frame = tangent_frame(&rv.model, &estimate.theta_hat)?;
        Ok(Realization { replicate_index, x_star, epsilon, x_obs, estimate, frame })
    }

    pub fn get(&self, rv: &RandomVariableModel, variable: &RandomVariable) -> Result<DVector<f64>> {
        match variable {
            RandomVariable::XStar => Ok(self.x_star.clone()),
            RandomVariable::Epsilon => Ok(self.epsilon.clone()),
            RandomVariable::XObs => Ok(self.x_obs.clone()),
            RandomVariable::XAt(theta) => evaluate(&rv.model, theta),
            RandomVariable::XHat => Ok(self.estimate.x_hat.clone()),
            RandomVariable::Residual => Ok(&self.x_obs - &self.estimate.x_hat),
            RandomVariable::Flaw => Ok(&self.estimate.x_hat - &self.x_star),
            RandomVariable::Tangent(eta) => tangent_point(&self.frame, eta),
        }
    }
}

fn tangent_point(frame: &TangentFrame, eta: &DVector<f64>) -> Result<DVector<f64>> {
    if eta.len() != frame.q() {
        return Err(Error::Shape(format!("eta of length {} for q = {}", eta.len(), frame.q())));
    }
    Ok(&frame.x_hat + &frame.jacobian * eta)
}

/// Realize one random variable at outcome `(rv.seed, replicate_index)`.
/// Estimate-dependent variables are fitted with default options.
pub fn realize(rv: &RandomVariableModel, variable: &RandomVariable, replicate_index: u64) -> Result<DVector<f64>> {
    match variable {
        RandomVariable::XStar => Ok(rv.state().clone()),
        RandomVariable::Epsilon => Ok(rv.noise(replicate_index)),
        RandomVariable::XObs => Ok(sample_outcome(rv, replicate_index)),
        RandomVariable::XAt(theta) => evaluate(&rv.model, theta),
        _ => Realization::new(rv, replicate_index, &FitOptions::default())?.get(rv, variable),
    }
}

/// Two-sided Kolmogorov-Smirnov distance between the sample ECDF and `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("no samples".into()));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::Invalid("samples must be finite".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d = 0.0_f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(d)
}

/// `(x, empirical CDF, theoretical CDF)` at every sorted sample.
pub fn ecdf_pairs(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Vec<[f64; 3]> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted.iter().enumerate().map(|(i, &x)| [x, (i + 1) as f64 / n, cdf(x)]).collect()
}

fn empirical_quantile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let w = pos - lo as f64;
    sorted[lo] * (1.0 - w) + sorted[hi] * w
}

#[derive(Debug, Clone, Serialize)]
pub struct ReplicateRecord {
    pub index: u64,
    pub theta_hat: Vec<f64>,
    pub converged: bool,
    pub sse: f64,
    pub error_norm2: f64,
    pub flaw_norm2: f64,
    pub residual_norm2: f64,
    /// Normalized flaw statistic; absent when the residual vanishes.
    pub f_stat: Option<f64>,
    pub raw_ratio: Option<f64>,
    /// `|xi| <= flaw_bound(|e|^2, q, n, alpha)`.
    pub covered: bool,
    /// `theta*` inside the linearized parameter region.
    pub region_covered: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    #[serde(skip)]
    residual: DVector<f64>,
    #[serde(skip)]
    flaw: DVector<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub mean: f64,
    pub q05: f64,
    pub median: f64,
    pub q95: f64,
}

impl Summary {
    fn of(values: &[f64]) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mean = if values.is_empty() { f64::NAN } else { values.iter().sum::<f64>() / values.len() as f64 };
        Summary {
            mean,
            q05: empirical_quantile(&sorted, 0.05),
            median: empirical_quantile(&sorted, 0.5),
            q95: empirical_quantile(&sorted, 0.95),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Aggregates {
    /// Summaries of `|eps|^2 / sigma^2`, `|xi|^2 / sigma^2`, `|e|^2 / sigma^2`.
    pub error_norm2: Summary,
    pub flaw_norm2: Summary,
    pub residual_norm2: Summary,
    pub f_stat: Summary,
    pub ks_error_chi2_n: f64,
    pub ks_flaw_chi2_q: f64,
    pub ks_residual_chi2_n_minus_q: f64,
    pub ks_f_stat: f64,
    /// `max_ij |mean_r(e_i xi_j)| / sigma^2`.
    pub orthogonality_cross_moment: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    fn range(name: &str, value: f64, lower: f64, upper: f64) -> Self {
        let status = if value >= lower && value <= upper { CheckStatus::Pass } else { CheckStatus::Fail };
        Check { name: name.to_string(), status, value, lower, upper, note: None }
    }

    fn skipped(name: &str, note: &str) -> Self {
        Check { name: name.to_string(), status: CheckStatus::Skipped, value: f64::NAN, lower: f64::NAN, upper: f64::NAN, note: Some(note.to_string()) }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MonteCarloReport {
    pub model: String,
    pub n: usize,
    pub q: usize,
    pub theta_star: Parameter,
    pub sigma: f64,
    pub seed: u64,
    pub alpha: f64,
    pub replicates: usize,
    pub excluded: usize,
    pub per_replicate: Vec<ReplicateRecord>,
    pub aggregates: Aggregates,
    /// Fraction of included replicates with `|xi| <= flaw_bound`.
    pub coverage: f64,
    /// Fraction of included replicates whose parameter region holds `theta*`.
    pub region_coverage: f64,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl MonteCarloReport {
    pub fn included(&self) -> impl Iterator<Item = &ReplicateRecord> {
        self.per_replicate.iter().filter(|r| r.failure.is_none() && r.converged)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn scaled_norms(&self) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let s2 = self.scale();
        let inc: Vec<&ReplicateRecord> = self.included().collect();
        (
            inc.iter().map(|r| r.error_norm2 / s2).collect(),
            inc.iter().map(|r| r.flaw_norm2 / s2).collect(),
            inc.iter().map(|r| r.residual_norm2 / s2).collect(),
        )
    }

    fn scale(&self) -> f64 {
        if self.sigma > 0.0 {
            self.sigma * self.sigma
        } else {
            1.0
        }
    }
}

fn run_replicate(rv: &RandomVariableModel, index: u64, opts: &FitOptions, bound_factor: f64, region_quantile: f64, alpha: f64, sigma2: f64) -> ReplicateRecord {
    let n = rv.model.n();
    let q = rv.model.q();
    let x_obs = sample_outcome(rv, index);
    let failed = |msg: String| ReplicateRecord {
        index,
        theta_hat: Vec::new(),
        converged: false,
        sse: f64::NAN,
        error_norm2: f64::NAN,
        flaw_norm2: f64::NAN,
        residual_norm2: f64::NAN,
        f_stat: None,
        raw_ratio: None,
        covered: false,
        region_covered: None,
        failure: Some(msg),
        residual: DVector::zeros(n),
        flaw: DVector::zeros(n),
    };
    let est = match rv.fit(&x_obs, opts) {
        Ok(e) => e,
        Err(e) => return failed(e.to_string()),
    };
    let decomp = match decompose(&x_obs, &est.x_hat, rv.state(), sigma2) {
        Ok(d) => d,
        Err(e) => return failed(e.to_string()),
    };
    let (f_stat, raw_ratio) = if decomp.residual_norm2 > 0.0 {
        let raw = decomp.flaw_norm2 / decomp.residual_norm2;
        (Some(raw * (n - q) as f64 / q as f64), Some(raw))
    } else {
        (None, None)
    };
    let bound = (bound_factor * decomp.residual_norm2).sqrt();
    let covered = decomp.flaw_norm2.sqrt() <= bound;
    let region_covered = if est.converged {
        tangent_frame(&rv.model, &est.theta_hat)
            .and_then(|frame| region_with_quantile(&frame, &est, alpha, region_quantile))
            .map(|region| region.contains(rv.theta_star.values()))
            .ok()
    } else {
        None
    };
    ReplicateRecord {
        index,
        theta_hat: est.theta_hat.iter().copied().collect(),
        converged: est.converged,
        sse: est.sse,
        error_norm2: decomp.error_norm2,
        flaw_norm2: decomp.flaw_norm2,
        residual_norm2: decomp.residual_norm2,
        f_stat,
        raw_ratio,
        covered,
        region_covered,
        failure: None,
        residual: decomp.residual,
        flaw: decomp.flaw,
    }
}

/// Fit `R` seeded replicates and compare the error decomposition with its
/// chi-square / F theory.
pub fn monte_carlo_study(rv: &RandomVariableModel, replicates: usize, alpha: f64, opts: &FitOptions) -> Result<MonteCarloReport> {
    let n = rv.model.n();
    let q = rv.model.q();
    if replicates < MIN_REPLICATES {
        return Err(Error::Invalid(format!("need at least {MIN_REPLICATES} replicates, got {replicates}")));
    }
    if n <= q {
        return Err(Error::Invalid(format!("need more cases than parameters (n = {n}, q = {q})")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    opts.validate()?;
    let degenerate = rv.sigma == 0.0;
    let sigma2 = if degenerate { 1.0 } else { rv.sigma * rv.sigma };
    let (qd, rd) = (q as u32, (n - q) as u32);
    let fq = f_quantile(qd, rd, 1.0 - alpha)?;
    let bound_factor = q as f64 / (n - q) as f64 * fq;

    let per_replicate: Vec<ReplicateRecord> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| run_replicate(rv, r, opts, bound_factor, fq, alpha, sigma2))
        .collect();

    let included: Vec<&ReplicateRecord> = per_replicate.iter().filter(|r| r.failure.is_none() && r.converged).collect();
    let excluded = replicates - included.len();
    let count = included.len().max(1) as f64;

    let scaled = |f: fn(&ReplicateRecord) -> f64| -> Vec<f64> { included.iter().map(|r| f(r) / sigma2).collect() };
    let err = scaled(|r| r.error_norm2);
    let flaw = scaled(|r| r.flaw_norm2);
    let res = scaled(|r| r.residual_norm2);
    let fstats: Vec<f64> = included.iter().filter_map(|r| r.f_stat).collect();

    let ks = |v: &[f64], cdf: &dyn Fn(f64) -> f64| ks_statistic(v, cdf).unwrap_or(f64::NAN);
    let ks_error = ks(&err, &|x| chi2_cdf(n as u32, x.max(0.0)).unwrap_or(f64::NAN));
    let ks_flaw = ks(&flaw, &|x| chi2_cdf(qd, x.max(0.0)).unwrap_or(f64::NAN));
    let ks_res = ks(&res, &|x| chi2_cdf(rd, x.max(0.0)).unwrap_or(f64::NAN));
    let ks_f = ks(&fstats, &|x| f_cdf(qd, rd, x.max(0.0)).unwrap_or(f64::NAN));

    let mut cross = DMatrix::<f64>::zeros(n, n);
    for r in &included {
        cross += &r.residual * r.flaw.transpose();
    }
    let orthogonality = cross.amax() / count / sigma2;

    let coverage = included.iter().filter(|r| r.covered).count() as f64 / count;
    let region_coverage = included.iter().filter(|r| r.region_covered == Some(true)).count() as f64 / count;

    let aggregates = Aggregates {
        error_norm2: Summary::of(&err),
        flaw_norm2: Summary::of(&flaw),
        residual_norm2: Summary::of(&res),
        f_stat: Summary::of(&fstats),
        ks_error_chi2_n: ks_error,
        ks_flaw_chi2_q: ks_flaw,
        ks_residual_chi2_n_minus_q: ks_res,
        ks_f_stat: ks_f,
        orthogonality_cross_moment: orthogonality,
    };

    let r_eff = count;
    let mut checks = Vec::new();
    let excluded_fraction = excluded as f64 / replicates as f64;
    checks.push(Check::range("excluded_fraction", excluded_fraction, 0.0, MAX_EXCLUDED_FRACTION));
    if degenerate {
        for name in DISTRIBUTION_CHECKS {
            checks.push(Check::skipped(name, "skipped (degenerate): sigma = 0"));
        }
    } else {
        let mean_check = |name: &str, value: f64, dof: f64| {
            let half = 5.0 * (2.0 * dof / r_eff).sqrt();
            Check::range(name, value, dof - half, dof + half)
        };
        checks.push(mean_check("mean_error_norm2", aggregates.error_norm2.mean, n as f64));
        checks.push(mean_check("mean_flaw_norm2", aggregates.flaw_norm2.mean, q as f64));
        checks.push(mean_check("mean_residual_norm2", aggregates.residual_norm2.mean, (n - q) as f64));
        let ks_limit = KS_SLACK * KS_CRITICAL_5PCT / r_eff.sqrt();
        checks.push(Check::range("ks_error_chi2_n", ks_error, 0.0, ks_limit));
        checks.push(Check::range("ks_flaw_chi2_q", ks_flaw, 0.0, ks_limit));
        checks.push(Check::range("ks_residual_chi2_n_minus_q", ks_res, 0.0, ks_limit));
        checks.push(Check::range("ks_f_stat", ks_f, 0.0, ks_limit));
        let se = (alpha * (1.0 - alpha) / r_eff).sqrt();
        checks.push(Check::range("flaw_bound_coverage", coverage, 1.0 - alpha - 4.0 * se, 1.0 - alpha + 4.0 * se));
        let region_half = if rv.model.is_linear() { 4.0 * se } else { (4.0 * se).max(0.03) };
        let mut region = Check::range("region_coverage", region_coverage, 1.0 - alpha - region_half, 1.0 - alpha + region_half);
        if !rv.model.is_linear() {
            region.note = Some("tangent-space approximation".into());
        }
        checks.push(region);
        checks.push(Check::range("orthogonality_cross_moment", orthogonality, 0.0, 4.0 / r_eff.sqrt()));
    }
    let passed = checks.iter().all(|c| c.status != CheckStatus::Fail);

    Ok(MonteCarloReport {
        model: rv.model.name().to_string(),
        n,
        q,
        theta_star: rv.theta_star.clone(),
        sigma: rv.sigma,
        seed: rv.seed,
        alpha,
        replicates,
        excluded,
        per_replicate,
        aggregates,
        coverage,
        region_coverage,
        checks,
        passed,
    })
}

const DISTRIBUTION_CHECKS: [&str; 10] = [
    "mean_error_norm2",
    "mean_flaw_norm2",
    "mean_residual_norm2",
    "ks_error_chi2_n",
    "ks_flaw_chi2_q",
    "ks_residual_chi2_n_minus_q",
    "ks_f_stat",
    "flaw_bound_coverage",
    "region_coverage",
    "orthogonality_cross_moment",
];
