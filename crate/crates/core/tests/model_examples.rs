mod common;

use std::f64::consts::PI;

use casefit::{evaluate, jacobian, second_derivative, slice_multiply, Array3, Bounds, Design, Error, ModelFunction, Parameter, Registry};
use common::{fd_jacobian, max_rel, TestRng};
use nalgebra::DMatrix;

fn p(v: &[f64]) -> Parameter {
    Parameter::from_slice(v).unwrap()
}

/// Registry sine model with the injectivity box lifted, for evaluating on
/// the boundary points 0 and pi.
fn unboxed_sine(u: &[f64]) -> ModelFunction {
    Registry::builtin()
        .build("sine", Design::from_column(u).unwrap())
        .unwrap()
        .with_bounds(Bounds::default_for(1))
        .unwrap()
}

#[test]
fn proportional_doubles_design() {
    let model = Registry::builtin().build("proportional", Design::from_column(&[1.0, 2.0, 3.0]).unwrap()).unwrap();
    assert_eq!(evaluate(&model, &p(&[2.0])).unwrap().as_slice(), &[2.0, 4.0, 6.0]);
}

#[test]
fn sine_vanishes_at_zero_and_pi() {
    assert_eq!(evaluate(&unboxed_sine(&[1.0, 2.0, 3.0]), &p(&[0.0])).unwrap().as_slice(), &[0.0, 0.0, 0.0]);
    let x = evaluate(&unboxed_sine(&[1.0, 2.0]), &p(&[PI])).unwrap();
    assert!(x.amax() <= 1e-12);
}

#[test]
fn registry_sine_rejects_points_outside_its_box() {
    let model = Registry::builtin().build("sine", Design::from_column(&[1.0, 2.0, 3.0]).unwrap()).unwrap();
    assert!(matches!(evaluate(&model, &p(&[0.0])), Err(Error::Domain(_))));
    assert!(matches!(evaluate(&model, &p(&[1.1])), Err(Error::Domain(_))));
}

#[test]
fn linear_jacobian_is_design_everywhere() {
    let model = Registry::builtin().build_default("linear").unwrap();
    let mut rng = TestRng::new(1);
    for _ in 0..20 {
        let theta = p(&[rng.uniform(-50.0, 50.0), rng.uniform(-50.0, 50.0)]);
        assert_eq!(&jacobian(&model, &theta).unwrap(), model.design().matrix());
    }
}

#[test]
fn sine_jacobian_at_origin_is_design() {
    let j = jacobian(&unboxed_sine(&[1.0, 2.0, 3.0]), &p(&[0.0])).unwrap();
    assert_eq!(j.as_slice(), &[1.0, 2.0, 3.0]);
}

#[test]
fn analytic_jacobians_match_finite_differences() {
    let registry = Registry::builtin();
    let mut rng = TestRng::new(2);
    for name in registry.names() {
        let model = registry.build_default(name).unwrap();
        let (lo, hi) = match name {
            "sine" => (0.01, 0.6),
            "expdecay" => (0.2, 2.0),
            _ => (-10.0, 10.0),
        };
        for _ in 0..100 {
            let theta: Vec<f64> = (0..model.q()).map(|_| rng.uniform(lo, hi)).collect();
            let eval = |t: &[f64]| evaluate(&model, &p(t)).unwrap().iter().copied().collect::<Vec<_>>();
            let err = max_rel(&jacobian(&model, &p(&theta)).unwrap(), &fd_jacobian(eval, &theta));
            assert!(err <= 1e-6, "{name} at {theta:?}: {err:e}");
        }
    }
}

#[test]
fn models_without_derivatives_fall_back_to_differences() {
    let model = Registry::builtin().build_default("expdecay").unwrap();
    let bare = model.clone().without_derivatives();
    let theta = p(&[2.0, 0.7]);
    let err = max_rel(&jacobian(&bare, &theta).unwrap(), &jacobian(&model, &theta).unwrap());
    assert!(err <= 1e-8, "{err:e}");
    let (a, b) = (second_derivative(&bare, &theta).unwrap(), second_derivative(&model, &theta).unwrap());
    let gap = a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(gap <= 1e-4, "{gap:e}");
}

#[test]
fn linear_second_derivative_is_zero() {
    let model = Registry::builtin().build_default("linear").unwrap();
    assert_eq!(second_derivative(&model, &p(&[1.0, -3.0])).unwrap().max_abs(), 0.0);
}

#[test]
fn sine_second_derivative_vanishes_at_origin() {
    assert_eq!(second_derivative(&unboxed_sine(&[1.0, 2.0, 3.0]), &p(&[0.0])).unwrap().max_abs(), 0.0);
}

#[test]
fn sine_second_derivative_matches_differenced_jacobian() {
    let u = [1.0, 2.0, 3.0];
    let model = Registry::builtin().build("sine", Design::from_column(&u).unwrap()).unwrap();
    let h = second_derivative(&model, &p(&[0.3])).unwrap();
    let step = 1e-5;
    for (i, ui) in u.iter().enumerate() {
        let fd = ((ui * (0.3 + step)).cos() * ui - (ui * (0.3 - step)).cos() * ui) / (2.0 * step);
        let closed = -ui * ui * (ui * 0.3).sin();
        assert!((h.get(0, i, 0) - fd).abs() <= 1e-4);
        assert!((h.get(0, i, 0) - closed).abs() <= 1e-12);
    }
}

#[test]
fn second_derivative_slices_are_symmetric() {
    let registry = Registry::builtin();
    let model = registry.build("expdecay", Design::from_column(&[0.5, 1.0, 4.0]).unwrap()).unwrap();
    let h = second_derivative(&model, &p(&[1.5, 0.4])).unwrap();
    for i in 0..3 {
        let s = h.slice(i);
        assert!((&s - s.transpose()).amax() <= 1e-8);
    }
}

#[test]
fn identity_factors_leave_array_unchanged() {
    let mut rng = TestRng::new(3);
    let slices: Vec<DMatrix<f64>> = (0..4).map(|_| rng.matrix(3, 2, -1.0, 1.0)).collect();
    let arr = Array3::from_slices(&slices).unwrap();
    let out = slice_multiply(Some(&DMatrix::identity(3, 3)), &arr, Some(&DMatrix::identity(2, 2))).unwrap();
    assert_eq!(out, arr);
}

#[test]
fn unit_row_vector_picks_slice_rows() {
    let mut rng = TestRng::new(4);
    let arr = Array3::from_slices(&(0..3).map(|_| rng.matrix(2, 2, -1.0, 1.0)).collect::<Vec<_>>()).unwrap();
    let v = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
    let out = slice_multiply(Some(&v), &arr, None).unwrap().squeeze().unwrap();
    assert_eq!(out.shape(), (3, 2));
    for i in 0..3 {
        for j in 0..2 {
            assert_eq!(out[(i, j)], arr.get(0, i, j));
        }
    }
}

#[test]
fn slice_multiply_matches_triple_loop() {
    let mut rng = TestRng::new(5);
    let (m, n, q, r, s) = (2, 3, 2, 3, 4);
    let slices: Vec<DMatrix<f64>> = (0..n).map(|_| rng.matrix(m, q, -1.0, 1.0)).collect();
    let arr = Array3::from_slices(&slices).unwrap();
    let left = rng.matrix(r, m, -1.0, 1.0);
    let right = rng.matrix(q, s, -1.0, 1.0);
    let out = slice_multiply(Some(&left), &arr, Some(&right)).unwrap();
    for i in 0..n {
        for a in 0..r {
            for b in 0..s {
                let mut acc: Option<f64> = None;
                for k in 0..m {
                    for l in 0..q {
                        let term = left[(a, k)] * slices[i][(k, l)] * right[(l, b)];
                        acc = Some(acc.map_or(term, |v| v + term));
                    }
                }
                let expected = acc.unwrap();
                assert!((out.get(a, i, b) - expected).abs() <= 1e-14, "{} vs {expected}", out.get(a, i, b));
            }
        }
    }
}

#[test]
fn component_rule_rows_are_scalar_gradients() {
    let model = Registry::builtin().build_default("expdecay").unwrap();
    let theta = [2.5, 0.6];
    let jac = jacobian(&model, &p(&theta)).unwrap();
    for i in 0..model.n() {
        let xi = |t: &[f64]| vec![evaluate(&model, &p(t)).unwrap()[i]];
        let grad = fd_jacobian(xi, &theta);
        assert!(max_rel(&jac.rows(i, 1).into_owned(), &grad) <= 1e-6);
    }
}

#[test]
fn unknown_model_is_reported() {
    assert!(matches!(Registry::builtin().build_default("cubic"), Err(Error::UnknownModel(_))));
}
