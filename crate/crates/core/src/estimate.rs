//! Least squares estimation as (local) orthogonal projection.
//!
//! Linear models are fitted by one exact projection of the observation onto
//! the design span. Nonlinear models use damped Gauss-Newton: every step
//! solves the projection of the current residual onto the Jacobian span,
//! regularized by `lambda * I`, through the orthogonal factorization of the
//! stacked system `[J; sqrt(lambda) I]`.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::{ser_mat, ser_vec};
use crate::model::{evaluate, jacobian, ModelFunction, Parameter};
use crate::projection::{project_affine_parts, project_subspace, split_basis, AffineSubspace, SubspaceBasis};

/// Damping beyond which a step is considered impossible.
const MAX_DAMPING: f64 = 1e20;
/// Basins whose losses agree within this (relative to max(1, sse)) tie.
pub const BASIN_SSE_TIE: f64 = 1e-8;
/// Tied basins further apart than this in parameter space are distinct minima.
pub const BASIN_THETA_SEPARATION: f64 = 1e-4;
/// Evaluating `x` carries an absolute error near `eps |x|`, so computed
/// losses cannot resolve reductions much below `eps |e| |x|`. A run whose
/// steps stall with the Gauss-Newton decrease under this multiple of that
/// level counts as converged.
pub const ORTHOGONALITY_FLOOR: f64 = 16.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Closed-form projection (linear path).
    Exact,
    /// `|J^T e| <= gradient_tolerance * (1 + |x_obs|)`.
    Gradient,
    /// Steps stalled with the tangent component of the residual below the
    /// loss resolution, `|P_T e|^2 <= ORTHOGONALITY_FLOOR * eps * |e| * |x|`.
    Orthogonality,
    /// Step shorter than `step_tolerance`.
    StepTolerance,
    /// No acceptable step at any damping level.
    DampingExhausted,
    MaxIterations,
}

#[derive(Debug, Clone, Serialize)]
pub struct Basin {
    pub start: Parameter,
    pub theta_hat: Parameter,
    pub sse: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Estimate {
    pub theta_hat: Parameter,
    #[serde(serialize_with = "ser_vec")]
    pub x_hat: DVector<f64>,
    #[serde(serialize_with = "ser_vec")]
    pub residual: DVector<f64>,
    pub sse: f64,
    pub converged: bool,
    pub iterations: usize,
    pub termination: Termination,
    /// Effective rank of the design (linear) or final Jacobian (nonlinear).
    pub rank: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub basins: Vec<Basin>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub non_isolated: bool,
    /// Loss at every accepted iterate, starting point first.
    #[serde(skip)]
    pub sse_trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub step_tolerance: f64,
    pub damping_init: f64,
    pub damping_factor: f64,
    /// Extra starting points tried after the primary one.
    pub multistart: Vec<Parameter>,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iterations: 100,
            gradient_tolerance: 1e-10,
            step_tolerance: 1e-12,
            damping_init: 1e-3,
            damping_factor: 10.0,
            multistart: Vec::new(),
        }
    }
}

impl FitOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("gradient_tolerance", self.gradient_tolerance),
            ("step_tolerance", self.step_tolerance),
            ("damping_init", self.damping_init),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.damping_factor > 1.0 && self.damping_factor.is_finite()) {
            return Err(Error::Invalid(format!("damping_factor must exceed 1, got {}", self.damping_factor)));
        }
        if self.max_iterations == 0 {
            return Err(Error::Invalid("max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

fn check_observations(x_obs: &DVector<f64>, n: usize) -> Result<()> {
    if x_obs.len() != n {
        return Err(Error::Shape(format!("{} observations for {} cases", x_obs.len(), n)));
    }
    if x_obs.iter().any(|v| !v.is_finite()) {
        return Err(Error::Invalid("observations contain non-finite values".into()));
    }
    Ok(())
}

/// Ordinary least squares for `x = U theta`: project `x_obs` onto span(U).
pub fn fit_linear(design_columns: &DMatrix<f64>, x_obs: &DVector<f64>) -> Result<Estimate> {
    let (n, q) = design_columns.shape();
    if q == 0 {
        return Err(Error::Shape("design has no columns".into()));
    }
    check_observations(x_obs, n)?;
    let basis = SubspaceBasis::new(design_columns.clone())?;
    let proj = project_subspace(&basis, x_obs)?;
    let theta_hat = Parameter::new(proj.coefficients)?;
    let x_hat = design_columns * theta_hat.values();
    let residual = x_obs - &x_hat;
    let sse = residual.norm_squared();
    let mut warnings = Vec::new();
    if proj.rank_deficient {
        warnings.push(format!("design rank {} < {} columns; minimum-norm estimate", proj.rank, q));
    }
    Ok(Estimate {
        theta_hat,
        x_hat,
        residual,
        sse,
        converged: true,
        iterations: 0,
        termination: Termination::Exact,
        rank: proj.rank,
        warnings,
        basins: Vec::new(),
        non_isolated: false,
        sse_trace: vec![sse],
    })
}

/// Local least squares for a general model, started at `theta0` and at every
/// point of `opts.multistart`. The best basin is returned; all are recorded
/// when more than one start was tried.
pub fn fit_nonlinear(model: &ModelFunction, x_obs: &DVector<f64>, theta0: &Parameter, opts: &FitOptions) -> Result<Estimate> {
    opts.validate()?;
    check_observations(x_obs, model.n())?;
    let starts: Vec<&Parameter> = std::iter::once(theta0).chain(opts.multistart.iter()).collect();

    let mut fits = starts
        .iter()
        .map(|s| damped_gauss_newton(model, x_obs, s, opts))
        .collect::<Result<Vec<Estimate>>>()?;
    if fits.len() == 1 {
        return Ok(fits.pop().expect("one fit"));
    }

    let basins: Vec<Basin> = starts
        .iter()
        .zip(&fits)
        .map(|(s, f)| Basin { start: (*s).clone(), theta_hat: f.theta_hat.clone(), sse: f.sse, converged: f.converged })
        .collect();

    let mut non_isolated = false;
    for (a, fa) in fits.iter().enumerate() {
        for fb in fits.iter().skip(a + 1) {
            if fa.converged && fb.converged && sse_tied(fa.sse, fb.sse) {
                let gap = (fa.theta_hat.values() - fb.theta_hat.values()).amax();
                if gap > BASIN_THETA_SEPARATION {
                    non_isolated = true;
                }
            }
        }
    }

    let best_idx = (0..fits.len())
        .min_by(|&a, &b| compare_basins(&fits[a], &fits[b]))
        .expect("at least one fit");
    let mut best = fits.swap_remove(best_idx);
    best.basins = basins;
    best.non_isolated = non_isolated;
    if non_isolated {
        best.warnings.push("distinct parameter values reach the same loss; minimum is not isolated".into());
    }
    Ok(best)
}

fn sse_tied(a: f64, b: f64) -> bool {
    (a - b).abs() <= BASIN_SSE_TIE * a.max(b).max(1.0)
}

fn compare_basins(a: &Estimate, b: &Estimate) -> Ordering {
    b.converged
        .cmp(&a.converged)
        .then_with(|| {
            if sse_tied(a.sse, b.sse) {
                Ordering::Equal
            } else {
                a.sse.total_cmp(&b.sse)
            }
        })
        .then_with(|| {
            a.theta_hat
                .iter()
                .zip(b.theta_hat.iter())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
        })
}

/// Minimizer of `|J delta - r|^2 + lambda |delta|^2`.
fn damped_step(jac: &DMatrix<f64>, residual: &DVector<f64>, lambda: f64) -> Result<DVector<f64>> {
    let (n, q) = jac.shape();
    let mut stacked = DMatrix::zeros(n + q, q);
    stacked.view_mut((0, 0), (n, q)).copy_from(jac);
    let root = lambda.sqrt();
    for j in 0..q {
        stacked[(n + j, j)] = root;
    }
    let mut rhs = DVector::zeros(n + q);
    rhs.rows_mut(0, n).copy_from(residual);
    let basis = SubspaceBasis::new(stacked)?;
    Ok(project_subspace(&basis, &rhs)?.coefficients)
}

/// The Gauss-Newton decrease `|P_T e|^2` is too small to show up in `sse`.
fn at_resolution_floor(basis: &SubspaceBasis, residual: &DVector<f64>, x: &DVector<f64>) -> Result<bool> {
    let tangential = project_subspace(basis, residual)?.projection.norm_squared();
    Ok(tangential <= ORTHOGONALITY_FLOOR * f64::EPSILON * residual.norm() * x.norm())
}

fn damped_gauss_newton(model: &ModelFunction, x_obs: &DVector<f64>, start: &Parameter, opts: &FitOptions) -> Result<Estimate> {
    let mut theta = start.clone();
    let mut x = evaluate(model, &theta)?;
    let mut residual = x_obs - &x;
    let mut sse = residual.norm_squared();
    let mut trace = vec![sse];
    let mut lambda = opts.damping_init;
    let gtol = opts.gradient_tolerance * (1.0 + x_obs.norm());
    let mut warnings = Vec::new();
    if model.n() < model.q() {
        warnings.push(format!("fewer cases ({}) than parameters ({})", model.n(), model.q()));
    }

    let mut iterations = 0;
    let mut rank = 0;
    let mut termination = Termination::MaxIterations;
    let mut gradient_ok = false;

    while iterations < opts.max_iterations {
        let jac = jacobian(model, &theta)?;
        rank = SubspaceBasis::new(jac.clone())?.rank();
        if rank == 0 {
            return Err(Error::Rank(format!("{} has a zero Jacobian at {:?}", model.name(), theta.as_slice())));
        }
        let grad = jac.tr_mul(&residual);
        if grad.norm() <= gtol {
            gradient_ok = true;
            termination = Termination::Gradient;
            break;
        }
        iterations += 1;

        let mut accepted = false;
        let mut out_of_box = 0usize;
        loop {
            let delta = damped_step(&jac, &residual, lambda)?;
            if delta.norm() <= opts.step_tolerance * (theta.norm() + opts.step_tolerance) {
                termination = Termination::StepTolerance;
                break;
            }
            let candidate = theta.values() + &delta;
            if !model.contains(&candidate) {
                out_of_box += 1;
                lambda *= opts.damping_factor;
                if lambda > MAX_DAMPING {
                    return Err(Error::Domain(format!(
                        "{}: iterates cannot be kept inside the parameter box ({} rejected steps)",
                        model.name(),
                        out_of_box
                    )));
                }
                continue;
            }
            let candidate = Parameter::new(candidate)?;
            let trial = match evaluate(model, &candidate) {
                Ok(v) => Some(v),
                Err(Error::Eval(_)) => None,
                Err(e) => return Err(e),
            };
            if let Some(x_c) = trial {
                let r_c = x_obs - &x_c;
                let sse_c = r_c.norm_squared();
                if sse_c <= sse {
                    theta = candidate;
                    x = x_c;
                    residual = r_c;
                    sse = sse_c;
                    trace.push(sse);
                    lambda = (lambda / opts.damping_factor).max(f64::MIN_POSITIVE);
                    accepted = true;
                    break;
                }
            }
            lambda *= opts.damping_factor;
            if lambda > MAX_DAMPING {
                termination = Termination::DampingExhausted;
                break;
            }
        }
        if !accepted {
            break;
        }
    }

    if !gradient_ok {
        let jac = jacobian(model, &theta)?;
        if jac.tr_mul(&residual).norm() <= gtol {
            gradient_ok = true;
            if termination == Termination::MaxIterations {
                termination = Termination::Gradient;
            }
        } else if termination != Termination::MaxIterations && at_resolution_floor(&SubspaceBasis::new(jac)?, &residual, &x)? {
            // stalled because no remaining decrease is visible in the loss
            gradient_ok = true;
            termination = Termination::Orthogonality;
        }
    }

    Ok(Estimate {
        theta_hat: theta,
        x_hat: x,
        residual,
        sse,
        converged: gradient_ok,
        iterations,
        termination,
        rank,
        warnings,
        basins: Vec::new(),
        non_isolated: false,
        sse_trace: trace,
    })
}

/// The model re-expressed around `theta_hat`: `y(zeta) = x(zeta + theta_hat) - x(theta_hat)`.
pub fn reparametrize(model: &ModelFunction, theta_hat: &Parameter) -> Result<ModelFunction> {
    model.recentered(theta_hat)
}

/// Local linearization at an estimate: the affine tangent space
/// `x_hat + span(J)` with orthonormal bases for its direction space and
/// the normal complement.
#[derive(Debug, Clone, Serialize)]
pub struct TangentFrame {
    pub theta_hat: Parameter,
    #[serde(serialize_with = "ser_vec")]
    pub x_hat: DVector<f64>,
    #[serde(serialize_with = "ser_mat")]
    pub jacobian: DMatrix<f64>,
    #[serde(skip)]
    pub tangent_onb: DMatrix<f64>,
    #[serde(skip)]
    pub complement_onb: DMatrix<f64>,
    pub rank: usize,
    #[serde(skip)]
    basis: SubspaceBasis,
}

impl TangentFrame {
    pub fn n(&self) -> usize {
        self.x_hat.len()
    }

    pub fn q(&self) -> usize {
        self.jacobian.ncols()
    }

    pub fn directions(&self) -> &SubspaceBasis {
        &self.basis
    }

    /// The affine tangent space as a projection target.
    pub fn affine(&self) -> AffineSubspace {
        AffineSubspace { anchor: self.x_hat.clone(), directions: self.basis.clone() }
    }
}

pub fn tangent_frame(model: &ModelFunction, theta_hat: &Parameter) -> Result<TangentFrame> {
    let x_hat = evaluate(model, theta_hat)?;
    let jac = jacobian(model, theta_hat)?;
    let basis = SubspaceBasis::new(jac.clone())?;
    if basis.rank() == 0 {
        return Err(Error::Rank(format!("{}: zero Jacobian at {:?}", model.name(), theta_hat.as_slice())));
    }
    let (tangent_onb, complement_onb) = split_basis(&basis)?;
    Ok(TangentFrame {
        theta_hat: theta_hat.clone(),
        x_hat,
        rank: basis.rank(),
        jacobian: jac,
        tangent_onb,
        complement_onb,
        basis,
    })
}

/// Projection of `x_obs` onto `x_hat + span(J)` and its coordinates `eta`
/// in the Jacobian basis.
pub fn tangent_project(frame: &TangentFrame, x_obs: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
    if x_obs.len() != frame.n() {
        return Err(Error::Shape(format!("{} observations for a frame in R^{}", x_obs.len(), frame.n())));
    }
    let parts = project_affine_parts(&frame.affine(), x_obs)?;
    if parts.rank_deficient {
        return Err(Error::Rank(format!("tangent directions have rank {} < {}", parts.rank, frame.q())));
    }
    Ok((parts.projection, parts.coefficients))
}
