mod common;

use std::str::FromStr;

use casefit::sampling::{standard_normals, uniforms, CheckStatus};
use casefit::{
    evaluate, ks_statistic, monte_carlo_study, realize, sample_outcome, Error, FitOptions, Parameter, RandomVariable,
    RandomVariableModel, Registry,
};
use nalgebra::DVector;

fn p(v: &[f64]) -> Parameter {
    Parameter::from_slice(v).unwrap()
}

fn linear(sigma: f64, seed: u64) -> RandomVariableModel {
    RandomVariableModel::new(Registry::builtin().build_default("linear").unwrap(), p(&[20.0, 1.0]), sigma, seed).unwrap()
}

#[test]
fn zero_noise_outcome_is_the_state() {
    let rv = linear(0.0, 1);
    let state = evaluate(&rv.model, &p(&[20.0, 1.0])).unwrap();
    assert_eq!(sample_outcome(&rv, 17), state);
}

#[test]
fn outcomes_are_reproducible_bit_for_bit() {
    let (a, b) = (linear(1.0, 9), linear(1.0, 9));
    for r in [0, 1, 1000, u64::MAX] {
        let (x, y) = (sample_outcome(&a, r), sample_outcome(&b, r));
        assert!(x.iter().zip(y.iter()).all(|(u, v)| u.to_bits() == v.to_bits()));
    }
    assert_ne!(sample_outcome(&a, 0), sample_outcome(&a, 1));
    assert_ne!(sample_outcome(&a, 0), sample_outcome(&linear(1.0, 10), 0));
}

#[test]
fn outcome_mean_converges_to_state() {
    let rv = linear(1.0, 2);
    let reps = 100_000u64;
    let mean = (0..reps).map(|r| sample_outcome(&rv, r)[0]).sum::<f64>() / reps as f64;
    assert!((mean - 21.0).abs() <= 4.0 / (reps as f64).sqrt());
}

#[test]
fn normals_look_standard() {
    let z = standard_normals(3, 0, 50_000);
    let cdf = |x: f64| 0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2);
    assert!(ks_statistic(z.as_slice(), cdf).unwrap() <= 1.36 / (50_000f64).sqrt() * 1.5);
}

#[test]
fn observation_minus_error_is_the_state() {
    let rv = linear(1.0, 4);
    let state = evaluate(&rv.model, &p(&[20.0, 1.0])).unwrap();
    for r in 0..100 {
        let obs = realize(&rv, &RandomVariable::XObs, r).unwrap();
        let eps = realize(&rv, &RandomVariable::Epsilon, r).unwrap();
        assert_eq!(obs - eps, state);
    }
}

#[test]
fn tangent_at_zero_is_the_estimate() {
    let rv = RandomVariableModel::new(Registry::builtin().build_default("sine").unwrap(), p(&[0.5]), 0.01, 5).unwrap();
    for r in 0..20 {
        let hat = realize(&rv, &RandomVariable::XHat, r).unwrap();
        assert_eq!(realize(&rv, &RandomVariable::Tangent(DVector::zeros(1)), r).unwrap(), hat);
    }
}

#[test]
fn tangent_realizations_are_affine_in_eta() {
    let rv = RandomVariableModel::new(Registry::builtin().build_default("expdecay").unwrap(), p(&[2.0, 0.7]), 0.01, 6).unwrap();
    let (e1, e2) = (DVector::from_vec(vec![0.3, -1.2]), DVector::from_vec(vec![-0.7, 0.4]));
    let (a, b) = (1.7, -0.4);
    for r in 0..10 {
        let t = |e: DVector<f64>| realize(&rv, &RandomVariable::Tangent(e), r).unwrap();
        let hat = realize(&rv, &RandomVariable::XHat, r).unwrap();
        let lhs = t(&e1 * a + &e2 * b);
        let rhs = t(e1.clone()) * a + t(e2.clone()) * b + hat * (1.0 - a - b);
        assert!((lhs - rhs).amax() <= 1e-12);
    }
}

#[test]
fn variable_tags_round_trip() {
    assert_eq!(RandomVariable::from_str("X_obs").unwrap(), RandomVariable::XObs);
    assert_eq!(RandomVariable::from_str("tangent(1, -2.5)").unwrap(), RandomVariable::Tangent(DVector::from_vec(vec![1.0, -2.5])));
    assert_eq!(RandomVariable::from_str("X_at(0.5)").unwrap(), RandomVariable::XAt(p(&[0.5])));
    assert!(matches!(RandomVariable::from_str("X_tilde"), Err(Error::UnknownVariable(_))));
}

#[test]
fn vanishing_noise_gives_vanishing_norms() {
    let report = monte_carlo_study(&linear(1e-12, 7), 100, 0.05, &FitOptions::default()).unwrap();
    for r in report.included() {
        assert!(r.error_norm2 < 1e-20 && r.flaw_norm2 < 1e-20 && r.residual_norm2 < 1e-20);
    }
}

#[test]
fn zero_noise_marks_distribution_checks_skipped() {
    let report = monte_carlo_study(&linear(0.0, 7), 100, 0.05, &FitOptions::default()).unwrap();
    let skipped: Vec<_> = report.checks.iter().filter(|c| c.status == CheckStatus::Skipped).collect();
    assert!(!skipped.is_empty());
    assert!(skipped.iter().all(|c| c.note.as_deref().unwrap().starts_with("skipped (degenerate)")));
    assert!(report.included().all(|r| r.error_norm2 == 0.0));
}

#[test]
fn linear_study_means_and_ks() {
    let report = monte_carlo_study(&linear(1.0, 8), 20_000, 0.05, &FitOptions::default()).unwrap();
    let (err, flaw, res) = report.scaled_norms();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    assert!((9.85..=10.15).contains(&mean(&err)));
    assert!((1.92..=2.08).contains(&mean(&flaw)));
    assert!((7.85..=8.15).contains(&mean(&res)));
    assert!(ks_statistic(&res, |x| statrs::distribution::ContinuousCDF::cdf(&statrs::distribution::ChiSquared::new(8.0).unwrap(), x)).unwrap() <= 0.015);
    assert!(report.aggregates.orthogonality_cross_moment <= 4.0 / (20_000f64).sqrt());
    assert!(report.passed);
}

#[test]
fn study_rejects_bad_configuration() {
    let rv = linear(1.0, 1);
    assert!(matches!(monte_carlo_study(&rv, 50, 0.05, &FitOptions::default()), Err(Error::Invalid(_))));
    assert!(matches!(monte_carlo_study(&rv, 100, 1.5, &FitOptions::default()), Err(Error::Invalid(_))));
}

#[test]
fn studies_are_deterministic() {
    let rv = RandomVariableModel::new(Registry::builtin().build_default("sine").unwrap(), p(&[0.5]), 0.01, 11).unwrap();
    let a = casefit::io::to_canonical_json(&monte_carlo_study(&rv, 300, 0.05, &FitOptions::default()).unwrap()).unwrap();
    let b = casefit::io::to_canonical_json(&monte_carlo_study(&rv, 300, 0.05, &FitOptions::default()).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn ks_on_exact_quantile_grid() {
    let n = 200;
    let samples: Vec<f64> = (1..=n).map(|i| (i as f64 - 0.5) / n as f64).collect();
    let d = ks_statistic(&samples, |x| x).unwrap();
    assert!((d - 0.5 / n as f64).abs() <= 1e-15);
    let normal = |x: f64| 0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2);
    assert_eq!(ks_statistic(&[0.0], normal).unwrap(), 0.5);
}

#[test]
fn ks_of_seeded_uniforms() {
    assert!(ks_statistic(&uniforms(12, 0, 10_000), |x| x).unwrap() <= 0.02);
}

#[test]
fn ks_input_errors() {
    assert!(matches!(ks_statistic(&[], |x| x), Err(Error::EmptyInput(_))));
    assert!(matches!(ks_statistic(&[f64::NAN], |x| x), Err(Error::Invalid(_))));
}
