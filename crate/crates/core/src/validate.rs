//! The invariant suite behind `casefit validate`.
//!
//! Every check is a pure function of the suite seed. A sabotage mode
//! corrupts one ingredient so that the suite can be shown to catch it.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimate::{fit_linear, fit_nonlinear, reparametrize, tangent_frame, tangent_project, FitOptions};
use crate::inference::{chi2_cdf, decompose, f_cdf, f_quantile, rotate};
use crate::model::{evaluate, jacobian, second_derivative, slice_multiply, Array3, Design, ModelFunction, Parameter, Registry};
use crate::projection::{project_affine, project_subspace, AffineSubspace, SubspaceBasis};
use crate::sampling::{ks_statistic, monte_carlo_study, uniforms, CheckStatus, MonteCarloReport, RandomVariableModel, Realization};

pub const DEFAULT_SEED: u64 = 20_240_917;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sabotage {
    None,
    /// Flip the sign of every analytic Jacobian.
    Jacobian,
}

impl std::str::FromStr for Sabotage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Sabotage::None),
            "jacobian" => Ok(Sabotage::Jacobian),
            other => Err(Error::Invalid(format!("unknown sabotage mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub seed: u64,
    pub sabotage: Sabotage,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

impl ValidationReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

struct Ctx {
    seed: u64,
    sabotage: Sabotage,
    registry: Registry,
    study: OnceLock<std::result::Result<MonteCarloReport, String>>,
}

impl Ctx {
    fn model(&self, name: &str) -> Result<ModelFunction> {
        let m = self.registry.build_default(name)?;
        Ok(self.apply(m))
    }

    fn model_with(&self, name: &str, design: Design) -> Result<ModelFunction> {
        let m = self.registry.build(name, design)?;
        Ok(self.apply(m))
    }

    fn apply(&self, m: ModelFunction) -> ModelFunction {
        match self.sabotage {
            Sabotage::None => m,
            Sabotage::Jacobian => m.sabotaged_jacobian(),
        }
    }

    fn rng(&self, salt: u64) -> Draw {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&salt.to_le_bytes());
        Draw(ChaCha20Rng::from_seed(key))
    }

    fn linear_study(&self) -> std::result::Result<&MonteCarloReport, String> {
        self.study
            .get_or_init(|| {
                let model = self.model("linear").map_err(|e| e.to_string())?;
                let rv = RandomVariableModel::new(model, Parameter::from_slice(&[20.0, 1.0]).expect("static"), 1.0, self.seed)
                    .map_err(|e| e.to_string())?;
                monte_carlo_study(&rv, 20_000, 0.05, &FitOptions::default()).map_err(|e| e.to_string())
            })
            .as_ref()
            .map_err(Clone::clone)
    }
}

struct Draw(ChaCha20Rng);

impl Draw {
    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let u = ((self.0.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64;
        lo + (hi - lo) * u
    }

    fn vector(&mut self, n: usize, lo: f64, hi: f64) -> DVector<f64> {
        DVector::from_fn(n, |_, _| self.uniform(lo, hi))
    }

    fn matrix(&mut self, n: usize, k: usize, lo: f64, hi: f64) -> DMatrix<f64> {
        DMatrix::from_fn(n, k, |_, _| self.uniform(lo, hi))
    }

    fn point_in(&mut self, lo: &[f64], hi: &[f64]) -> Parameter {
        Parameter::new(DVector::from_iterator(lo.len(), lo.iter().zip(hi).map(|(&l, &h)| self.uniform(l, h))))
            .expect("finite draw")
    }
}

/// Box used when sampling interior points of a registry model.
fn sample_box(name: &str, q: usize) -> (Vec<f64>, Vec<f64>) {
    match name {
        // default sine design reaches u = 5
        "sine" => (vec![0.02; q], vec![0.6; q]),
        "expdecay" => (vec![0.5, 0.1], vec![5.0, 2.0]),
        _ => (vec![-10.0; q], vec![10.0; q]),
    }
}

/// Central differences of `evaluate`, independent of the model's own FD path.
fn fd_oracle(model: &ModelFunction, theta: &Parameter) -> Result<DMatrix<f64>> {
    let mut out = DMatrix::zeros(model.n(), model.q());
    for j in 0..model.q() {
        let h = f64::EPSILON.cbrt() * (1.0 + theta[j].abs());
        let mut plus = theta.values().clone();
        plus[j] += h;
        let mut minus = theta.values().clone();
        minus[j] -= h;
        let fp = evaluate(model, &Parameter::new(plus.clone())?)?;
        let fm = evaluate(model, &Parameter::new(minus.clone())?)?;
        out.set_column(j, &((fp - fm) / (plus[j] - minus[j])));
    }
    Ok(out)
}

fn max_rel_err(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs() / y.abs().max(1.0)).fold(0.0, f64::max)
}

type CheckFn = fn(&Ctx) -> Result<(bool, String)>;

const REGISTRY_MODELS: [&str; 4] = ["expdecay", "linear", "proportional", "sine"];

fn jacobian_fd(ctx: &Ctx, name: &str) -> Result<(bool, String)> {
    let model = ctx.model(name)?;
    let (lo, hi) = sample_box(name, model.q());
    let mut draw = ctx.rng(1);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let theta = draw.point_in(&lo, &hi);
        worst = worst.max(max_rel_err(&jacobian(&model, &theta)?, &fd_oracle(&model, &theta)?));
    }
    Ok((worst <= 1e-6, format!("max relative error {worst:.3e} (limit 1e-6)")))
}

const CHECKS: &[(&str, &str, CheckFn)] = &[
    ("model.jacobian_fd.expdecay", "analytic vs central-difference Jacobian, 100 points", |c| jacobian_fd(c, "expdecay")),
    ("model.jacobian_fd.linear", "analytic vs central-difference Jacobian, 100 points", |c| jacobian_fd(c, "linear")),
    ("model.jacobian_fd.proportional", "analytic vs central-difference Jacobian, 100 points", |c| jacobian_fd(c, "proportional")),
    ("model.jacobian_fd.sine", "analytic vs central-difference Jacobian, 100 points", |c| jacobian_fd(c, "sine")),
    ("model.component_rule", "row i of the Jacobian is the gradient of x_i", check_component_rule),
    ("model.linear_jacobian_constant", "linear Jacobian identical at random points", check_linear_constant),
    ("model.hessian_symmetric", "analytic per-case Hessians symmetric to 1e-8", check_hessian_symmetric),
    ("model.hessian_fd.sine", "sine second derivative vs differenced Jacobian", check_hessian_fd),
    ("model.slice_identity", "identity factors leave the array bit-identical", check_slice_identity),
    ("projection.idempotence", "P(Px) = Px", check_idempotence),
    ("projection.contraction", "|Px| <= |x|", check_contraction),
    ("projection.self_adjoint", "<Px, y> = <x, Py>", check_self_adjoint),
    ("projection.pythagoras", "|x|^2 = |Px|^2 + |x - Px|^2", check_pythagoras),
    ("projection.dense_oracle", "orthogonality and agreement with U(U^T U)^-1 U^T", check_dense_oracle),
    ("projection.affine_reduction", "affine projection is translated subspace projection", check_affine_reduction),
    ("estimate.linear_orthogonality", "OLS residual orthogonal to every design column", check_linear_orthogonality),
    ("estimate.linear_global_min", "no sampled parameter beats the OLS loss", check_global_min),
    ("estimate.monotone_sse", "accepted Gauss-Newton iterates never increase the loss", check_monotone),
    ("estimate.reparam_commute", "y(zeta) = x(zeta + theta_hat) - x(theta_hat) on a grid", check_reparam),
    ("estimate.reparam_jacobian", "Jacobian of the recentred model at 0 equals J(theta_hat)", check_reparam_jacobian),
    ("estimate.tangent_idempotence", "tangent projection is idempotent", check_tangent_idempotence),
    ("inference.additivity", "error = flaw + residual exactly", check_additivity),
    ("inference.linear_orthogonality", "<flaw, residual> = 0 over 1000 replicates", check_flaw_residual_orthogonal),
    ("inference.rotated_frame", "residual vanishes on the tangent block, flaw on the complement", check_rotated),
    ("inference.chi2_closed_form", "chi2_cdf(2, x) = 1 - exp(-x/2)", check_chi2_closed_form),
    ("inference.f_inverse", "f_cdf and f_quantile are mutual inverses", check_f_inverse),
    ("sampling.determinism", "identical seeds give bit-identical realizations and studies", check_determinism),
    ("sampling.coherence", "realization identities hold exactly", check_coherence),
    ("sampling.ks_uniform", "KS of 1e4 seeded uniforms <= 0.02", check_ks_uniform),
    ("sampling.linear_study", "chi-square means, KS, flaw-bound coverage for n = 10, q = 2", check_linear_study),
    ("sampling.empirical_orthogonality", "mean e_i xi_j across replicates within 4/sqrt(R)", check_empirical_orthogonality),
];

/// `(name, description)` for every check in the suite.
pub fn list_checks() -> Vec<(&'static str, &'static str)> {
    CHECKS.iter().map(|(n, d, _)| (*n, *d)).collect()
}

/// Run the whole suite.
pub fn run_suite(seed: u64, sabotage: Sabotage) -> ValidationReport {
    let ctx = Ctx { seed, sabotage, registry: Registry::builtin(), study: OnceLock::new() };
    let checks: Vec<CheckResult> = CHECKS
        .iter()
        .map(|(name, _, f)| match f(&ctx) {
            Ok((passed, detail)) => CheckResult { name: name.to_string(), passed, detail },
            Err(e) => CheckResult { name: name.to_string(), passed: false, detail: format!("error: {e}") },
        })
        .collect();
    let passed = checks.iter().all(|c| c.passed);
    ValidationReport { seed, sabotage, checks, passed }
}

fn check_component_rule(ctx: &Ctx) -> Result<(bool, String)> {
    let mut worst = 0.0_f64;
    let mut draw = ctx.rng(2);
    for name in REGISTRY_MODELS {
        let model = ctx.model(name)?;
        let (lo, hi) = sample_box(name, model.q());
        for _ in 0..10 {
            let theta = draw.point_in(&lo, &hi);
            let jac = jacobian(&model, &theta)?;
            for i in 0..model.n() {
                // gradient of the scalar x_i, one coordinate at a time
                for j in 0..model.q() {
                    let h = f64::EPSILON.cbrt() * (1.0 + theta[j].abs());
                    let mut tp = theta.values().clone();
                    tp[j] += h;
                    let mut tm = theta.values().clone();
                    tm[j] -= h;
                    let xp = evaluate(&model, &Parameter::new(tp.clone())?)?[i];
                    let xm = evaluate(&model, &Parameter::new(tm.clone())?)?[i];
                    let g = (xp - xm) / (tp[j] - tm[j]);
                    worst = worst.max((jac[(i, j)] - g).abs() / g.abs().max(1.0));
                }
            }
        }
    }
    Ok((worst <= 1e-6, format!("max relative error {worst:.3e} (limit 1e-6)")))
}

fn check_linear_constant(ctx: &Ctx) -> Result<(bool, String)> {
    let model = ctx.model("linear")?;
    let mut draw = ctx.rng(3);
    let first = jacobian(&model, &draw.point_in(&[-10.0, -10.0], &[10.0, 10.0]))?;
    let same = (0..20).all(|_| jacobian(&model, &draw.point_in(&[-10.0, -10.0], &[10.0, 10.0])).map(|j| j == first).unwrap_or(false));
    Ok((same, if same { "exact equality at 21 points".into() } else { "Jacobian varies with theta".into() }))
}

fn check_hessian_symmetric(ctx: &Ctx) -> Result<(bool, String)> {
    let mut worst = 0.0_f64;
    let mut draw = ctx.rng(4);
    for name in REGISTRY_MODELS {
        let model = ctx.model(name)?;
        let (lo, hi) = sample_box(name, model.q());
        let theta = draw.point_in(&lo, &hi);
        let h = second_derivative(&model, &theta)?;
        for i in 0..model.n() {
            let s = h.slice(i);
            worst = worst.max((&s - s.transpose()).amax());
        }
    }
    Ok((worst <= 1e-8, format!("max asymmetry {worst:.3e} (limit 1e-8)")))
}

fn check_hessian_fd(ctx: &Ctx) -> Result<(bool, String)> {
    let model = ctx.model_with("sine", Design::from_column(&[1.0, 2.0, 3.0])?)?;
    let theta = Parameter::from_slice(&[0.3])?;
    let analytic = second_derivative(&model, &theta)?;
    let h = f64::EPSILON.cbrt() * 1.3;
    let jp = jacobian(&model, &Parameter::from_slice(&[0.3 + h])?)?;
    let jm = jacobian(&model, &Parameter::from_slice(&[0.3 - h])?)?;
    let fd = (jp - jm) / (2.0 * h);
    let worst = (0..3).map(|i| (analytic.get(0, i, 0) - fd[(i, 0)]).abs()).fold(0.0, f64::max);
    Ok((worst <= 1e-4, format!("max abs error {worst:.3e} (limit 1e-4)")))
}

fn check_slice_identity(ctx: &Ctx) -> Result<(bool, String)> {
    let mut draw = ctx.rng(5);
    let slices: Vec<DMatrix<f64>> = (0..4).map(|_| draw.matrix(3, 2, -5.0, 5.0)).collect();
    let arr = Array3::from_slices(&slices)?;
    let out = slice_multiply(Some(&DMatrix::identity(3, 3)), &arr, Some(&DMatrix::identity(2, 2)))?;
    let same = out.as_slice().iter().zip(arr.as_slice()).all(|(a, b)| a.to_bits() == b.to_bits());
    Ok((same, if same { "bit-identical".into() } else { "identity product changed values".into() }))
}

fn random_instances(ctx: &Ctx, salt: u64, count: usize) -> Vec<(SubspaceBasis, DVector<f64>)> {
    let mut draw = ctx.rng(salt);
    (0..count)
        .map(|t| {
            let n = 3 + t % 6;
            let k = 1 + t % (n - 1);
            let basis = SubspaceBasis::new(draw.matrix(n, k, -1.0, 1.0)).expect("finite");
            (basis, draw.vector(n, -2.0, 2.0))
        })
        .collect()
}

fn check_idempotence(ctx: &Ctx) -> Result<(bool, String)> {
    let mut worst = 0.0_f64;
    for (b, x) in random_instances(ctx, 10, 200) {
        let p = project_subspace(&b, &x)?.projection;
        let pp = project_subspace(&b, &p)?.projection;
        worst = worst.max((pp - p).amax());
    }
    Ok((worst <= 1e-12, format!("max |P(Px) - Px| {worst:.3e} (limit 1e-12)")))
}

fn check_contraction(ctx: &Ctx) -> Result<(bool, String)> {
    let mut worst = f64::NEG_INFINITY;
    for (b, x) in random_instances(ctx, 11, 200) {
        let p = project_subspace(&b, &x)?.projection;
        worst = worst.max(p.norm() - x.norm());
    }
    Ok((worst <= 1e-12, format!("max |Px| - |x| = {worst:.3e} (limit 1e-12)")))
}

fn check_self_adjoint(ctx: &Ctx) -> Result<(bool, String)> {
    let mut draw = ctx.rng(13);
    let mut worst = 0.0_f64;
    for (b, x) in random_instances(ctx, 12, 200) {
        let y = draw.vector(x.len(), -2.0, 2.0);
        let px = project_subspace(&b, &x)?.projection;
        let py = project_subspace(&b, &y)?.projection;
        worst = worst.max((px.dot(&y) - x.dot(&py)).abs());
    }
    Ok((worst <= 1e-10, format!("max asymmetry {worst:.3e} (limit 1e-10)")))
}

fn check_pythagoras(ctx: &Ctx) -> Result<(bool, String)> {
    let mut worst = 0.0_f64;
    for (b, x) in random_instances(ctx, 14, 200) {
        let p = project_subspace(&b, &x)?.projection;
        let lhs = x.norm_squared();
        let rhs = p.norm_squared() + (&x - &p).norm_squared();
        worst = worst.max((lhs - rhs).abs() / lhs.max(f64::MIN_POSITIVE));
    }
    Ok((worst <= 1e-10, format!("max relative gap {worst:.3e} (limit 1e-10)")))
}

fn check_dense_oracle(ctx: &Ctx) -> Result<(bool, String)> {
    let mut draw = ctx.rng(15);
    let (mut orth, mut agree) = (0.0_f64, 0.0_f64);
    for _ in 0..200 {
        let u = draw.matrix(5, 2, -1.0, 1.0) + DMatrix::from_fn(5, 2, |i, j| if i == j { 2.0 } else { 0.0 });
        let x = draw.vector(5, -2.0, 2.0);
        let p = project_subspace(&SubspaceBasis::new(u.clone())?, &x)?.projection;
        let r = &x - &p;
        for c in u.column_iter() {
            orth = orth.max(r.dot(&c).abs() / x.norm());
        }
        let gram_inv = (u.transpose() * &u).try_inverse().ok_or_else(|| Error::Rank("gram".into()))?;
        let dense = &u * gram_inv * u.transpose() * &x;
        agree = agree.max((dense - &p).amax());
    }
    let ok = orth <= 1e-10 && agree <= 1e-10;
    Ok((ok, format!("orthogonality {orth:.3e}, dense agreement {agree:.3e} (limits 1e-10)")))
}

fn check_affine_reduction(ctx: &Ctx) -> Result<(bool, String)> {
    let mut draw = ctx.rng(16);
    for (b, x) in random_instances(ctx, 17, 100) {
        let a = draw.vector(x.len(), -3.0, 3.0);
        let space = AffineSubspace::new(a.clone(), b.clone())?;
        let p = project_affine(&space, &x)?;
        let via = project_subspace(&b, &(&x - &a))?.projection + &a;
        if p != via {
            return Ok((false, "affine projection differs from translated subspace projection".into()));
        }
    }
    Ok((true, "identical on 100 instances".into()))
}

fn check_linear_orthogonality(ctx: &Ctx) -> Result<(bool, String)> {
    let mut draw = ctx.rng(20);
    let mut worst = 0.0_f64;
    for _ in 0..200 {
        let u = draw.matrix(8, 3, -1.0, 1.0);
        let x = draw.vector(8, -5.0, 5.0);
        let est = fit_linear(&u, &x)?;
        for c in u.column_iter() {
            worst = worst.max(est.residual.dot(&c).abs() / (x.norm() * c.norm()));
        }
    }
    Ok((worst <= 1e-10, format!("max scaled inner product {worst:.3e} (limit 1e-10)")))
}

fn check_global_min(ctx: &Ctx) -> Result<(bool, String)> {
    let mut draw = ctx.rng(21);
    let model = ctx.model("linear")?;
    let u = model.design().matrix().clone();
    let x = draw.vector(u.nrows(), 15.0, 35.0);
    let est = fit_linear(&u, &x)?;
    let mut worst = f64::INFINITY;
    for _ in 0..1000 {
        let theta = est.theta_hat.values() + draw.vector(2, -1.0, 1.0);
        let loss = (&x - &u * theta).norm_squared();
        worst = worst.min(loss - est.sse);
    }
    Ok((worst >= -1e-12, format!("min loss gap {worst:.3e} (limit -1e-12)")))
}

fn check_monotone(ctx: &Ctx) -> Result<(bool, String)> {
    let model = ctx.model("expdecay")?;
    let mut draw = ctx.rng(22);
    let truth = Parameter::from_slice(&[2.0, 0.7])?;
    let x_obs = evaluate(&model, &truth)? + draw.vector(model.n(), -0.05, 0.05);
    let mut increases = 0;
    for _ in 0..10 {
        let start = draw.point_in(&[0.5, 0.1], &[5.0, 2.0]);
        let est = fit_nonlinear(&model, &x_obs, &start, &FitOptions::default())?;
        increases += est.sse_trace.windows(2).filter(|w| w[1] > w[0]).count();
    }
    Ok((increases == 0, format!("{increases} loss increases over 10 fits")))
}

fn check_reparam(ctx: &Ctx) -> Result<(bool, String)> {
    let model = ctx.model("expdecay")?;
    let theta_hat = Parameter::from_slice(&[2.0, 0.7])?;
    let y = reparametrize(&model, &theta_hat)?;
    let base = evaluate(&model, &theta_hat)?;
    let mut worst = 0.0_f64;
    for a in -5..=5 {
        for b in -5..=5 {
            let zeta = Parameter::from_slice(&[0.1 * a as f64, 0.05 * b as f64])?;
            let direct = evaluate(&model, &Parameter::new(zeta.values() + theta_hat.values())?)? - &base;
            worst = worst.max((evaluate(&y, &zeta)? - direct).amax());
        }
    }
    let zero = evaluate(&y, &Parameter::zeros(2)?)?;
    let ok = worst <= 1e-12 && zero.iter().all(|v| *v == 0.0);
    Ok((ok, format!("max deviation {worst:.3e} (limit 1e-12), y(0) = 0: {}", zero.iter().all(|v| *v == 0.0))))
}

fn check_reparam_jacobian(ctx: &Ctx) -> Result<(bool, String)> {
    let mut worst = 0.0_f64;
    let mut draw = ctx.rng(23);
    for name in REGISTRY_MODELS {
        let model = ctx.model(name)?;
        let (lo, hi) = sample_box(name, model.q());
        let theta_hat = draw.point_in(&lo, &hi);
        let y = reparametrize(&model, &theta_hat)?;
        let diff = jacobian(&y, &Parameter::zeros(model.q())?)? - jacobian(&model, &theta_hat)?;
        worst = worst.max(diff.amax());
    }
    Ok((worst <= 1e-10, format!("max deviation {worst:.3e} (limit 1e-10)")))
}

fn check_tangent_idempotence(ctx: &Ctx) -> Result<(bool, String)> {
    let model = ctx.model("sine")?;
    let frame = tangent_frame(&model, &Parameter::from_slice(&[0.5])?)?;
    let mut draw = ctx.rng(24);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let x = draw.vector(model.n(), -1.0, 1.0);
        let (p, _) = tangent_project(&frame, &x)?;
        let (pp, _) = tangent_project(&frame, &p)?;
        worst = worst.max((pp - p).amax());
    }
    Ok((worst <= 1e-12, format!("max deviation {worst:.3e} (limit 1e-12)")))
}

fn check_additivity(ctx: &Ctx) -> Result<(bool, String)> {
    let mut draw = ctx.rng(30);
    for _ in 0..1000 {
        let a = draw.vector(6, -1e3, 1e3);
        let b = draw.vector(6, -1.0, 1.0);
        let c = draw.vector(6, -1e-3, 1e-3);
        let d = decompose(&a, &b, &c, 1.0)?;
        if (&d.error - (&d.flaw + &d.residual)).iter().any(|v| *v != 0.0) {
            return Ok((false, "additivity broken".into()));
        }
    }
    Ok((true, "exact on 1000 random triples".into()))
}

fn linear_replicates(ctx: &Ctx, count: u64) -> Result<(RandomVariableModel, Vec<Realization>)> {
    let rv = RandomVariableModel::new(ctx.model("linear")?, Parameter::from_slice(&[20.0, 1.0])?, 1.0, ctx.seed)?;
    let reps = (0..count).map(|r| Realization::new(&rv, r, &FitOptions::default())).collect::<Result<Vec<_>>>()?;
    Ok((rv, reps))
}

fn check_flaw_residual_orthogonal(ctx: &Ctx) -> Result<(bool, String)> {
    let (rv, reps) = linear_replicates(ctx, 1000)?;
    let mut worst = 0.0_f64;
    for r in &reps {
        let d = decompose(&r.x_obs, &r.estimate.x_hat, rv.state(), 1.0)?;
        let scale = d.flaw.norm() * d.residual.norm();
        if scale > 0.0 {
            worst = worst.max(d.flaw.dot(&d.residual).abs() / scale);
        }
    }
    Ok((worst <= 1e-10, format!("max cosine {worst:.3e} (limit 1e-10)")))
}

fn check_rotated(ctx: &Ctx) -> Result<(bool, String)> {
    let (rv, reps) = linear_replicates(ctx, 1000)?;
    let (mut tangent_res, mut normal_flaw) = (0.0_f64, 0.0_f64);
    for r in &reps {
        let d = decompose(&r.x_obs, &r.estimate.x_hat, rv.state(), 1.0)?;
        tangent_res = tangent_res.max(rotate(&r.frame, &d.residual)?.0.amax());
        normal_flaw = normal_flaw.max(rotate(&r.frame, &d.flaw)?.1.amax());
    }
    let ok = tangent_res <= 1e-10 && normal_flaw <= 1e-10;
    Ok((ok, format!("residual on tangent block {tangent_res:.3e}, flaw on complement {normal_flaw:.3e} (limits 1e-10)")))
}

fn check_chi2_closed_form(_: &Ctx) -> Result<(bool, String)> {
    let mut worst = 0.0_f64;
    for i in 0..=400 {
        let x = 0.05 * i as f64;
        worst = worst.max((chi2_cdf(2, x)? - (1.0 - (-x / 2.0).exp())).abs());
    }
    Ok((worst <= 1e-12, format!("max deviation {worst:.3e} (limit 1e-12)")))
}

fn check_f_inverse(_: &Ctx) -> Result<(bool, String)> {
    let mut worst = 0.0_f64;
    for d1 in [1u32, 2, 3, 5, 10] {
        for d2 in [1u32, 2, 4, 8, 30] {
            for p in [0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99] {
                let x = f_quantile(d1, d2, p)?;
                worst = worst.max((f_cdf(d1, d2, x)? - p).abs());
            }
        }
    }
    Ok((worst <= 1e-8, format!("max |F(F^-1(p)) - p| {worst:.3e} (limit 1e-8)")))
}

fn check_determinism(ctx: &Ctx) -> Result<(bool, String)> {
    let model = ctx.model("sine")?;
    let rv = RandomVariableModel::new(model, Parameter::from_slice(&[0.5])?, 0.01, ctx.seed)?;
    let bits = |v: &DVector<f64>| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    let same_draws = (0..50).all(|r| bits(&crate::sampling::sample_outcome(&rv, r)) == bits(&crate::sampling::sample_outcome(&rv, r)));
    let a = crate::io::to_canonical_json(&monte_carlo_study(&rv, 200, 0.05, &FitOptions::default())?)?;
    let b = crate::io::to_canonical_json(&monte_carlo_study(&rv, 200, 0.05, &FitOptions::default())?)?;
    let ok = same_draws && a == b;
    Ok((ok, format!("draws identical: {same_draws}, study JSON identical: {}", a == b)))
}

fn check_coherence(ctx: &Ctx) -> Result<(bool, String)> {
    let (rv, reps) = linear_replicates(ctx, 200)?;
    for r in &reps {
        let residual = &r.x_obs - &r.estimate.x_hat;
        let flaw = &r.estimate.x_hat - &r.x_star;
        let ok = r.x_obs == &r.x_star + &r.epsilon
            && &r.x_obs - &r.epsilon == r.x_star
            && &r.x_obs - &r.x_star == r.epsilon
            && &flaw + &residual == r.epsilon
            && r.x_star == *rv.state();
        if !ok {
            return Ok((false, format!("identity broken at replicate {}", r.replicate_index)));
        }
    }
    Ok((true, "exact on 200 replicates".into()))
}

fn check_ks_uniform(ctx: &Ctx) -> Result<(bool, String)> {
    let u = uniforms(ctx.seed, 0, 10_000);
    let d = ks_statistic(&u, |x| x.clamp(0.0, 1.0))?;
    Ok((d <= 0.02, format!("KS {d:.4} (limit 0.02)")))
}

fn check_linear_study(ctx: &Ctx) -> Result<(bool, String)> {
    let report = ctx.linear_study().map_err(Error::Numerical)?;
    let failed: Vec<&str> = report.checks.iter().filter(|c| c.status == CheckStatus::Fail).map(|c| c.name.as_str()).collect();
    let a = &report.aggregates;
    Ok((
        failed.is_empty(),
        format!(
            "means {:.4}/{:.4}/{:.4}, KS {:.4}/{:.4}/{:.4}, coverage {:.4}{}",
            a.error_norm2.mean,
            a.flaw_norm2.mean,
            a.residual_norm2.mean,
            a.ks_error_chi2_n,
            a.ks_flaw_chi2_q,
            a.ks_residual_chi2_n_minus_q,
            report.coverage,
            if failed.is_empty() { String::new() } else { format!("; failed: {}", failed.join(", ")) }
        ),
    ))
}

fn check_empirical_orthogonality(ctx: &Ctx) -> Result<(bool, String)> {
    let report = ctx.linear_study().map_err(Error::Numerical)?;
    let v = report.aggregates.orthogonality_cross_moment;
    let limit = 4.0 / (report.replicates as f64).sqrt();
    Ok((v <= limit, format!("max cross moment {v:.4} (limit {limit:.4})")))
}
