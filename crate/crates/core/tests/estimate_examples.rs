mod common;

use casefit::{
    evaluate, fit_linear, fit_nonlinear, jacobian, project_subspace, reparametrize, sample_outcome, tangent_frame,
    tangent_project, Bounds, Design, Error, FitOptions, ModelFunction, Parameter, RandomVariableModel, Registry,
    SubspaceBasis, Termination,
};
use common::{grid_argmin, TestRng};
use nalgebra::{dvector, DMatrix, DVector};

fn p(v: &[f64]) -> Parameter {
    Parameter::from_slice(v).unwrap()
}

fn sine(u: &[f64]) -> ModelFunction {
    Registry::builtin().build("sine", Design::from_column(u).unwrap()).unwrap()
}

#[test]
fn saturated_linear_fit_echoes_observation() {
    let x = dvector![3.0, -1.0, 0.25, 8.0];
    let est = fit_linear(&DMatrix::identity(4, 4), &x).unwrap();
    assert_eq!(est.theta_hat.values(), &x);
    assert_eq!(est.sse, 0.0);
    assert_eq!(est.residual.amax(), 0.0);
}

#[test]
fn noiseless_linear_recovery() {
    let mut rng = TestRng::new(21);
    let u = rng.well_conditioned(7, 3);
    let theta = dvector![1.5, -0.5, 4.0];
    let est = fit_linear(&u, &(&u * &theta)).unwrap();
    assert!((est.theta_hat.values() - theta).amax() <= 1e-10);
}

#[test]
fn one_parameter_linear_fit_matches_grid() {
    let u = [1.0, 2.0, 3.0, 4.0];
    let x = [1.0, 1.0, 2.0, 2.0];
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..=2_000_000 {
        let t = i as f64 * 1e-6;
        let loss: f64 = u.iter().zip(&x).map(|(ui, xi)| (ui * t - xi).powi(2)).sum();
        if loss < best.0 {
            best = (loss, t);
        }
    }
    let est = fit_linear(&DMatrix::from_column_slice(4, 1, &u), &DVector::from_column_slice(&x)).unwrap();
    assert!((est.theta_hat[0] - best.1).abs() <= 1e-5);
    assert!((est.theta_hat[0] - 17.0 / 30.0).abs() <= 1e-14);
}

#[test]
fn rank_deficient_linear_fit_warns() {
    let u = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 1.0, 2.0, 1.0, 2.0]);
    let est = fit_linear(&u, &dvector![1.0, 2.0, 3.0]).unwrap();
    assert_eq!(est.rank, 1);
    assert!(!est.warnings.is_empty());
    assert!((est.x_hat - dvector![2.0, 2.0, 2.0]).amax() <= 1e-12);
}

#[test]
fn zero_noise_sine_recovery() {
    let model = sine(&[1.0, 2.0, 3.0]);
    let x = evaluate(&model, &p(&[0.5])).unwrap();
    let est = fit_nonlinear(&model, &x, &p(&[0.4]), &FitOptions::default()).unwrap();
    assert!(est.converged);
    assert!((est.theta_hat[0] - 0.5).abs() <= 1e-8);
}

#[test]
fn linear_model_through_iterative_path_agrees() {
    let model = Registry::builtin().build_default("linear").unwrap();
    let mut rng = TestRng::new(22);
    let x = rng.vector(model.n(), 0.0, 30.0);
    let direct = fit_linear(model.design().matrix(), &x).unwrap();
    let iterative = fit_nonlinear(&model, &x, &p(&[0.0, 0.0]), &FitOptions::default()).unwrap();
    assert!(iterative.converged);
    assert!((direct.theta_hat.values() - iterative.theta_hat.values()).amax() <= 1e-8);
}

#[test]
fn expdecay_fit_matches_nested_grid() {
    let model = Registry::builtin().build_default("expdecay").unwrap();
    let rv = RandomVariableModel::new(model.clone(), p(&[2.0, 0.7]), 0.01, 99).unwrap();
    let x = sample_outcome(&rv, 0);
    let u: Vec<f64> = (1..=5).map(f64::from).collect();
    let loss = |t: &[f64]| u.iter().zip(x.iter()).map(|(ui, xi)| (t[0] * (-t[1] * ui).exp() - xi).powi(2)).sum::<f64>();
    let oracle = grid_argmin(loss, &[1.0, 0.2], &[3.0, 1.2], 101, 1e-5);
    let est = fit_nonlinear(&model, &x, &p(&[2.2, 0.77]), &FitOptions::default()).unwrap();
    assert!(est.converged);
    assert!((est.theta_hat[0] - oracle[0]).abs() <= 1e-4 && (est.theta_hat[1] - oracle[1]).abs() <= 1e-4);
}

#[test]
fn accepted_iterates_never_increase_loss() {
    let model = Registry::builtin().build_default("expdecay").unwrap();
    let x = dvector![1.1, 0.55, 0.3, 0.12, 0.07];
    let est = fit_nonlinear(&model, &x, &p(&[5.0, 2.0]), &FitOptions::default()).unwrap();
    assert!(est.sse_trace.len() > 2);
    assert!(est.sse_trace.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn multistart_keeps_the_deepest_basin() {
    // x(theta) = theta^2 has mirrored minima; a one-sided box keeps one
    let model = ModelFunction::new("square", Design::from_column(&[1.0, 1.0]).unwrap(), 1, |u, t| u.column(0) * (t[0] * t[0]))
        .unwrap()
        .with_bounds(Bounds::closed(vec![-3.0], vec![3.0]))
        .unwrap();
    let x = dvector![4.0, 4.0];
    let opts = FitOptions { multistart: vec![p(&[-1.5]), p(&[2.5])], ..FitOptions::default() };
    let est = fit_nonlinear(&model, &x, &p(&[1.0]), &opts).unwrap();
    assert_eq!(est.basins.len(), 3);
    assert!(est.non_isolated);
    // lexicographic tie-break picks the negative root
    assert!((est.theta_hat[0] + 2.0).abs() <= 1e-8);
}

#[test]
fn start_outside_box_is_a_domain_error() {
    let model = sine(&[1.0, 2.0, 3.0]);
    let x = dvector![0.1, 0.2, 0.3];
    assert!(matches!(fit_nonlinear(&model, &x, &p(&[2.0]), &FitOptions::default()), Err(Error::Domain(_))));
}

#[test]
fn iteration_cap_reports_non_convergence() {
    let model = Registry::builtin().build_default("expdecay").unwrap();
    let x = dvector![1.1, 0.55, 0.3, 0.12, 0.07];
    let opts = FitOptions { max_iterations: 1, ..FitOptions::default() };
    let est = fit_nonlinear(&model, &x, &p(&[5.0, 2.0]), &opts).unwrap();
    assert!(!est.converged);
    assert_eq!(est.termination, Termination::MaxIterations);
}

#[test]
fn reparametrized_model_at_origin() {
    let model = Registry::builtin().build_default("expdecay").unwrap();
    let theta_hat = p(&[2.0, 0.7]);
    let y = reparametrize(&model, &theta_hat).unwrap();
    assert_eq!(evaluate(&y, &p(&[0.0, 0.0])).unwrap().amax(), 0.0);
    let gap = (jacobian(&y, &p(&[0.0, 0.0])).unwrap() - jacobian(&model, &theta_hat).unwrap()).amax();
    assert!(gap <= 1e-10);
}

#[test]
fn reparametrized_sine_is_a_difference_of_evaluations() {
    let u = [1.0, 2.0, 3.0];
    let y = reparametrize(&sine(&u), &p(&[0.3])).unwrap();
    let got = evaluate(&y, &p(&[0.1])).unwrap();
    for (i, ui) in u.iter().enumerate() {
        assert!((got[i] - ((ui * 0.4_f64).sin() - (ui * 0.3_f64).sin())).abs() <= 1e-12);
    }
}

#[test]
fn linear_tangent_space_is_the_model_subspace() {
    let model = Registry::builtin().build_default("linear").unwrap();
    let frame = tangent_frame(&model, &p(&[3.0, -1.0])).unwrap();
    let mut rng = TestRng::new(23);
    let basis = SubspaceBasis::new(model.design().matrix().clone()).unwrap();
    for _ in 0..20 {
        let x = rng.vector(model.n(), -10.0, 10.0);
        let (proj, _) = tangent_project(&frame, &x).unwrap();
        assert!((proj - project_subspace(&basis, &x).unwrap().projection).amax() <= 1e-10);
    }
}

#[test]
fn frame_blocks_are_orthonormal() {
    let model = Registry::builtin().build_default("expdecay").unwrap();
    let frame = tangent_frame(&model, &p(&[2.0, 0.7])).unwrap();
    let (t, c) = (&frame.tangent_onb, &frame.complement_onb);
    assert!((t.transpose() * t - DMatrix::identity(2, 2)).amax() <= 1e-12);
    assert!((c.transpose() * c - DMatrix::identity(3, 3)).amax() <= 1e-12);
    assert!((t.transpose() * c).amax() <= 1e-12);
}

#[test]
fn sine_tangent_direction_matches_secant() {
    let model = sine(&[1.0, 2.0, 3.0]);
    let frame = tangent_frame(&model, &p(&[0.5])).unwrap();
    let h = 1e-7;
    let secant = (evaluate(&model, &p(&[0.5 + h])).unwrap() - evaluate(&model, &p(&[0.5])).unwrap()) / h;
    let secant = secant.normalize();
    let analytic = dvector![0.5_f64.cos(), 2.0 * 1.0_f64.cos(), 3.0 * 1.5_f64.cos()].normalize();
    let t = frame.tangent_onb.column(0).into_owned();
    let sign = t.dot(&analytic).signum();
    assert!((&t * sign - &analytic).amax() <= 1e-12);
    assert!((&t * sign - secant).amax() <= 1e-6);
}

#[test]
fn tangent_projection_anchor_and_orthogonality() {
    let model = Registry::builtin().build_default("expdecay").unwrap();
    let frame = tangent_frame(&model, &p(&[2.0, 0.7])).unwrap();
    let (proj, eta) = tangent_project(&frame, &frame.x_hat).unwrap();
    assert!((proj - &frame.x_hat).amax() <= 1e-15);
    assert!(eta.amax() <= 1e-15);

    let mut rng = TestRng::new(24);
    for _ in 0..20 {
        let x = rng.vector(5, -2.0, 2.0);
        let (proj, eta) = tangent_project(&frame, &x).unwrap();
        for c in frame.jacobian.column_iter() {
            assert!((&x - &proj).dot(&c).abs() <= 1e-10);
        }
        assert!((&frame.x_hat + &frame.jacobian * eta - proj).amax() <= 1e-12);
    }
}

#[test]
fn converged_fit_is_its_own_tangent_projection() {
    let model = Registry::builtin().build_default("expdecay").unwrap();
    let x = dvector![1.1, 0.55, 0.3, 0.12, 0.07];
    let est = fit_nonlinear(&model, &x, &p(&[1.0, 0.5]), &FitOptions::default()).unwrap();
    assert!(est.converged);
    let frame = tangent_frame(&model, &est.theta_hat).unwrap();
    let (proj, eta) = tangent_project(&frame, &x).unwrap();
    assert!((proj - &est.x_hat).amax() <= 1e-8);
    assert!(eta.amax() <= 1e-8);
}

#[test]
fn singular_jacobian_has_no_frame() {
    let model = Registry::builtin()
        .build("linear", Design::new(DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0])).unwrap())
        .unwrap();
    assert!(matches!(tangent_frame(&model, &p(&[1.0, 1.0])), Err(Error::Rank(_))));
}

#[test]
fn stall_at_loss_resolution_counts_as_converged() {
    // this outcome stalls with |J^T e| near 5e-9: the remaining decrease is
    // below what the computed loss can resolve
    let rv = RandomVariableModel::new(sine(&[1.0, 2.0, 3.0, 4.0, 5.0]), p(&[0.5]), 0.01, 20_240_917).unwrap();
    let x = sample_outcome(&rv, 52);
    let est = fit_nonlinear(&rv.model, &x, &p(&[0.55]), &FitOptions::default()).unwrap();
    assert!(est.converged, "{:?}", est.termination);
    let u: Vec<f64> = (1..=5).map(f64::from).collect();
    let loss = |t: &[f64]| u.iter().zip(x.iter()).map(|(ui, xi)| ((ui * t[0]).sin() - xi).powi(2)).sum::<f64>();
    let oracle = grid_argmin(loss, &[0.4], &[0.6], 101, 1e-9)[0];
    assert!((est.theta_hat[0] - oracle).abs() <= 1e-7);
}
