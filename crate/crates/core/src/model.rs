//! Model functions: parameter-to-prediction maps over a fixed design.
//!
//! A model function sends `theta in R^q` to a prediction `x(theta) in R^n`,
//! one entry per case. Jacobians are stored cases-by-parameters (`n x q`),
//! so row `i` is the gradient of the scalar component `x_i`. Second
//! derivatives are `q x n x q` arrays whose middle axis indexes cases.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Default half-width of the admissible box when a model declares none.
pub const DEFAULT_BOUND: f64 = 1e6;

/// A parameter vector. All entries finite, at least one entry.
#[derive(Debug, Clone, PartialEq)]
pub struct Parameter(DVector<f64>);

impl Parameter {
    pub fn new(values: DVector<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Invalid("parameter must have at least one entry".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid(format!("non-finite parameter entry in {:?}", values.as_slice())));
        }
        Ok(Parameter(values))
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(values))
    }

    pub fn zeros(q: usize) -> Result<Self> {
        Self::new(DVector::zeros(q))
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DVector<f64> {
        self.0
    }
}

impl Deref for Parameter {
    type Target = DVector<f64>;

    fn deref(&self) -> &DVector<f64> {
        &self.0
    }
}

impl Serialize for Parameter {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.0.iter())
    }
}

/// Predictor values, one row per case and one column per predictor.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    matrix: DMatrix<f64>,
    names: Vec<String>,
}

impl Design {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let names = (0..matrix.ncols()).map(|k| format!("u{}", k + 1)).collect();
        Self::with_names(matrix, names)
    }

    pub fn with_names(matrix: DMatrix<f64>, names: Vec<String>) -> Result<Self> {
        if matrix.nrows() == 0 {
            return Err(Error::Invalid("design must have at least one case".into()));
        }
        if names.len() != matrix.ncols() {
            return Err(Error::Shape(format!(
                "{} predictor names for {} design columns",
                names.len(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("design contains non-finite values".into()));
        }
        Ok(Design { matrix, names })
    }

    /// A single-predictor design.
    pub fn from_column(values: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_column_slice(values.len(), 1, values))
    }

    /// An `n x 0` design for models that use no predictors.
    pub fn empty(n: usize) -> Result<Self> {
        Self::new(DMatrix::zeros(n, 0))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn m(&self) -> usize {
        self.matrix.ncols()
    }
}

/// Admissible parameter box. With `open` set, the faces are excluded.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub open: bool,
}

impl Bounds {
    pub fn closed(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        Bounds { lower, upper, open: false }
    }

    pub fn open(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        Bounds { lower, upper, open: true }
    }

    pub fn default_for(q: usize) -> Self {
        Self::closed(vec![-DEFAULT_BOUND; q], vec![DEFAULT_BOUND; q])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, theta: &DVector<f64>) -> bool {
        theta.len() == self.dim()
            && theta.iter().enumerate().all(|(j, &t)| {
                if self.open {
                    t > self.lower[j] && t < self.upper[j]
                } else {
                    t >= self.lower[j] && t <= self.upper[j]
                }
            })
    }

    fn contains_coord(&self, j: usize, t: f64) -> bool {
        if self.open {
            t > self.lower[j] && t < self.upper[j]
        } else {
            t >= self.lower[j] && t <= self.upper[j]
        }
    }

    /// Translate the box by `-offset` (the domain of `zeta = theta - offset`).
    pub fn shifted(&self, offset: &DVector<f64>) -> Self {
        Bounds {
            lower: self.lower.iter().zip(offset.iter()).map(|(l, o)| l - o).collect(),
            upper: self.upper.iter().zip(offset.iter()).map(|(u, o)| u - o).collect(),
            open: self.open,
        }
    }

    /// Pull `theta` inside the box, keeping a small margin from open faces.
    pub fn clamp_inside(&self, theta: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            theta.len(),
            theta.iter().enumerate().map(|(j, &t)| {
                let (lo, hi) = (self.lower[j], self.upper[j]);
                let margin = if self.open { 1e-9 * (hi - lo).abs().max(1e-300) } else { 0.0 };
                t.clamp(lo + margin, hi - margin)
            }),
        )
    }

    pub fn midpoint(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.dim(),
            self.lower.iter().zip(&self.upper).map(|(l, u)| 0.5 * (l + u)),
        )
    }
}

pub type EvalFn = Arc<dyn Fn(&DMatrix<f64>, &DVector<f64>) -> DVector<f64> + Send + Sync>;
pub type JacobianFn = Arc<dyn Fn(&DMatrix<f64>, &DVector<f64>) -> DMatrix<f64> + Send + Sync>;
pub type SecondFn = Arc<dyn Fn(&DMatrix<f64>, &DVector<f64>) -> Array3 + Send + Sync>;

/// A differentiable map `theta -> x(theta)` with a fixed design.
#[derive(Clone)]
pub struct ModelFunction {
    name: String,
    design: Design,
    q: usize,
    evaluator: EvalFn,
    analytic_jacobian: Option<JacobianFn>,
    analytic_second: Option<SecondFn>,
    bounds: Bounds,
    linear: bool,
}

impl fmt::Debug for ModelFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelFunction")
            .field("name", &self.name)
            .field("n", &self.n())
            .field("q", &self.q)
            .field("analytic_jacobian", &self.analytic_jacobian.is_some())
            .field("analytic_second", &self.analytic_second.is_some())
            .field("bounds", &self.bounds)
            .field("linear", &self.linear)
            .finish()
    }
}

impl ModelFunction {
    pub fn new<F>(name: impl Into<String>, design: Design, q: usize, evaluator: F) -> Result<Self>
    where
        F: Fn(&DMatrix<f64>, &DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    {
        if q == 0 {
            return Err(Error::Invalid("model needs at least one parameter".into()));
        }
        Ok(ModelFunction {
            name: name.into(),
            design,
            q,
            evaluator: Arc::new(evaluator),
            analytic_jacobian: None,
            analytic_second: None,
            bounds: Bounds::default_for(q),
            linear: false,
        })
    }

    pub fn with_jacobian<F>(mut self, jacobian: F) -> Self
    where
        F: Fn(&DMatrix<f64>, &DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
    {
        self.analytic_jacobian = Some(Arc::new(jacobian));
        self
    }

    pub fn with_second<F>(mut self, second: F) -> Self
    where
        F: Fn(&DMatrix<f64>, &DVector<f64>) -> Array3 + Send + Sync + 'static,
    {
        self.analytic_second = Some(Arc::new(second));
        self
    }

    pub fn with_bounds(mut self, bounds: Bounds) -> Result<Self> {
        if bounds.dim() != self.q || bounds.upper.len() != self.q {
            return Err(Error::Shape(format!("bounds of dimension {} for q = {}", bounds.dim(), self.q)));
        }
        self.bounds = bounds;
        Ok(self)
    }

    /// Drop analytic derivatives so that finite differences are used.
    pub fn without_derivatives(mut self) -> Self {
        self.analytic_jacobian = None;
        self.analytic_second = None;
        self
    }

    /// Flip the sign of the analytic Jacobian. Only used as a negative
    /// control for the validation suite.
    pub fn sabotaged_jacobian(mut self) -> Self {
        if let Some(jac) = self.analytic_jacobian.take() {
            self.analytic_jacobian = Some(Arc::new(move |u, t| -jac(u, t)));
        }
        self
    }

    /// `zeta -> x(zeta + offset) - x(offset)` on the translated box.
    pub fn recentered(&self, offset: &Parameter) -> Result<ModelFunction> {
        let base = evaluate(self, offset)?;
        let off = offset.values().clone();

        let inner = Arc::clone(&self.evaluator);
        let o = off.clone();
        let evaluator: EvalFn = Arc::new(move |u, z| inner(u, &(z + &o)) - &base);

        let analytic_jacobian = self.analytic_jacobian.as_ref().map(|jac| {
            let jac = Arc::clone(jac);
            let o = off.clone();
            Arc::new(move |u: &DMatrix<f64>, z: &DVector<f64>| jac(u, &(z + &o))) as JacobianFn
        });
        let analytic_second = self.analytic_second.as_ref().map(|sec| {
            let sec = Arc::clone(sec);
            let o = off.clone();
            Arc::new(move |u: &DMatrix<f64>, z: &DVector<f64>| sec(u, &(z + &o))) as SecondFn
        });

        Ok(ModelFunction {
            name: format!("{}@recentered", self.name),
            design: self.design.clone(),
            q: self.q,
            evaluator,
            analytic_jacobian,
            analytic_second,
            bounds: self.bounds.shifted(&off),
            linear: false,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn design(&self) -> &Design {
        &self.design
    }

    pub fn n(&self) -> usize {
        self.design.n()
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    pub fn has_analytic_jacobian(&self) -> bool {
        self.analytic_jacobian.is_some()
    }

    pub fn has_analytic_second(&self) -> bool {
        self.analytic_second.is_some()
    }

    /// True when `x(theta) = U theta` with `U` the design matrix.
    pub fn is_linear(&self) -> bool {
        self.linear
    }

    pub fn contains(&self, theta: &DVector<f64>) -> bool {
        self.bounds.contains(theta)
    }

    fn check_domain(&self, theta: &Parameter) -> Result<()> {
        if theta.len() != self.q {
            return Err(Error::Shape(format!("{} got parameter of length {}, expected {}", self.name, theta.len(), self.q)));
        }
        if !self.bounds.contains(theta) {
            return Err(Error::Domain(format!("{} at {:?}", self.name, theta.as_slice())));
        }
        Ok(())
    }

    fn raw_eval(&self, theta: &DVector<f64>) -> Result<DVector<f64>> {
        let x = (self.evaluator)(self.design.matrix(), theta);
        if x.len() != self.n() {
            return Err(Error::Shape(format!("{} returned {} values for {} cases", self.name, x.len(), self.n())));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Eval(format!("{} at {:?}", self.name, theta.as_slice())));
        }
        Ok(x)
    }
}

/// `x(theta)`.
pub fn evaluate(model: &ModelFunction, theta: &Parameter) -> Result<DVector<f64>> {
    model.check_domain(theta)?;
    model.raw_eval(theta)
}

/// Central-difference step for coordinate value `t`.
pub fn fd_step(t: f64) -> f64 {
    f64::EPSILON.cbrt() * (1.0 + t.abs())
}

/// `n x q` Jacobian, analytic when the model provides one.
pub fn jacobian(model: &ModelFunction, theta: &Parameter) -> Result<DMatrix<f64>> {
    model.check_domain(theta)?;
    match &model.analytic_jacobian {
        Some(jac) => {
            let j = jac(model.design.matrix(), theta);
            if j.shape() != (model.n(), model.q) {
                return Err(Error::Shape(format!("{} jacobian has shape {:?}", model.name, j.shape())));
            }
            if j.iter().any(|v| !v.is_finite()) {
                return Err(Error::Eval(format!("{} jacobian at {:?}", model.name, theta.as_slice())));
            }
            Ok(j)
        }
        None => numeric_jacobian(model, theta),
    }
}

/// Finite-difference Jacobian. Central where the stencil fits in the box,
/// one-sided where only one side does.
pub fn numeric_jacobian(model: &ModelFunction, theta: &Parameter) -> Result<DMatrix<f64>> {
    model.check_domain(theta)?;
    let mut out = DMatrix::zeros(model.n(), model.q);
    for j in 0..model.q {
        let col = stencil_derivative(model, theta, j, fd_step(theta[j]), |t| model.raw_eval(t))?;
        out.set_column(j, &col);
    }
    Ok(out)
}

fn stencil_derivative<T, F>(model: &ModelFunction, theta: &DVector<f64>, j: usize, h: f64, f: F) -> Result<T>
where
    F: Fn(&DVector<f64>) -> Result<T>,
    T: std::ops::Sub<Output = T> + std::ops::Div<f64, Output = T>,
{
    let mut plus = theta.clone();
    plus[j] += h;
    let mut minus = theta.clone();
    minus[j] -= h;
    let up = model.bounds.contains_coord(j, plus[j]);
    let down = model.bounds.contains_coord(j, minus[j]);
    match (up, down) {
        (true, true) => {
            let h2 = plus[j] - minus[j];
            Ok((f(&plus)? - f(&minus)?) / h2)
        }
        (true, false) => {
            let step = plus[j] - theta[j];
            Ok((f(&plus)? - f(theta)?) / step)
        }
        (false, true) => {
            let step = theta[j] - minus[j];
            Ok((f(theta)? - f(&minus)?) / step)
        }
        (false, false) => Err(Error::Numerical(format!(
            "difference stencil for parameter {} of {} leaves the domain on both sides",
            j, model.name
        ))),
    }
}

/// `q x n x q` array of per-case Hessians.
pub fn second_derivative(model: &ModelFunction, theta: &Parameter) -> Result<SecondDerivativeArray> {
    model.check_domain(theta)?;
    if let Some(second) = &model.analytic_second {
        let arr = second(model.design.matrix(), theta);
        if arr.dims() != (model.q, model.n(), model.q) {
            return Err(Error::Shape(format!("{} second derivative has dims {:?}", model.name, arr.dims())));
        }
        return Ok(arr);
    }
    // Nested differences need a larger step when the Jacobian is itself numeric.
    let exponent = if model.analytic_jacobian.is_some() { 1.0 / 3.0 } else { 1.0 / 4.0 };
    let jac_at = |t: &DVector<f64>| -> Result<DMatrix<f64>> {
        match &model.analytic_jacobian {
            Some(jac) => Ok(jac(model.design.matrix(), t)),
            None => {
                let mut out = DMatrix::zeros(model.n(), model.q);
                for k in 0..model.q {
                    let h = f64::EPSILON.powf(exponent) * (1.0 + t[k].abs());
                    let col = stencil_derivative(model, t, k, h, |s| model.raw_eval(s))?;
                    out.set_column(k, &col);
                }
                Ok(out)
            }
        }
    };
    let (n, q) = (model.n(), model.q);
    let mut arr = Array3::zeros(q, n, q);
    for j in 0..q {
        let h = f64::EPSILON.powf(exponent) * (1.0 + theta[j].abs());
        let dj = stencil_derivative(model, theta, j, h, jac_at)?;
        for i in 0..n {
            for k in 0..q {
                arr.set(j, i, k, dj[(i, k)]);
            }
        }
    }
    for i in 0..n {
        for j in 0..q {
            for k in (j + 1)..q {
                let avg = 0.5 * (arr.get(j, i, k) + arr.get(k, i, j));
                arr.set(j, i, k, avg);
                arr.set(k, i, j, avg);
            }
        }
    }
    Ok(arr)
}

/// A dense three-axis array `rows x cases x cols`, viewed as a pile of
/// `cases` matrices of shape `rows x cols`.
#[derive(Debug, Clone, PartialEq)]
pub struct Array3 {
    rows: usize,
    cases: usize,
    cols: usize,
    data: Vec<f64>,
}

/// Per-case Hessians, `q x n x q`.
pub type SecondDerivativeArray = Array3;

impl Array3 {
    pub fn zeros(rows: usize, cases: usize, cols: usize) -> Self {
        Array3 { rows, cases, cols, data: vec![0.0; rows * cases * cols] }
    }

    pub fn from_slices(slices: &[DMatrix<f64>]) -> Result<Self> {
        let first = slices.first().ok_or_else(|| Error::EmptyInput("no slices".into()))?;
        let (rows, cols) = first.shape();
        let mut arr = Array3::zeros(rows, slices.len(), cols);
        for (i, s) in slices.iter().enumerate() {
            if s.shape() != (rows, cols) {
                return Err(Error::Shape(format!("slice {} has shape {:?}, expected {:?}", i, s.shape(), (rows, cols))));
            }
            for r in 0..rows {
                for c in 0..cols {
                    arr.set(r, i, c, s[(r, c)]);
                }
            }
        }
        Ok(arr)
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.rows, self.cases, self.cols)
    }

    #[inline]
    fn index(&self, r: usize, i: usize, c: usize) -> usize {
        (i * self.rows + r) * self.cols + c
    }

    pub fn get(&self, r: usize, i: usize, c: usize) -> f64 {
        self.data[self.index(r, i, c)]
    }

    pub fn set(&mut self, r: usize, i: usize, c: usize, value: f64) {
        let idx = self.index(r, i, c);
        self.data[idx] = value;
    }

    pub fn slice(&self, i: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |r, c| self.get(r, i, c))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Drop a unit outer axis: `1 x n x s` becomes `n x s`, `r x n x 1`
    /// becomes `r x n`.
    pub fn squeeze(&self) -> Result<DMatrix<f64>> {
        if self.rows == 1 {
            Ok(DMatrix::from_fn(self.cases, self.cols, |i, c| self.get(0, i, c)))
        } else if self.cols == 1 {
            Ok(DMatrix::from_fn(self.rows, self.cases, |r, i| self.get(r, i, 0)))
        } else {
            Err(Error::Shape(format!("no unit axis to squeeze in {:?}", self.dims())))
        }
    }
}

/// Slice-wise product `left * A_i * right` for every case `i`.
pub fn slice_multiply(left: Option<&DMatrix<f64>>, array: &Array3, right: Option<&DMatrix<f64>>) -> Result<Array3> {
    let (a, n, b) = array.dims();
    if let Some(l) = left {
        if l.ncols() != a {
            return Err(Error::Shape(format!("left factor has {} columns, array slices have {} rows", l.ncols(), a)));
        }
    }
    if let Some(r) = right {
        if r.nrows() != b {
            return Err(Error::Shape(format!("right factor has {} rows, array slices have {} columns", r.nrows(), b)));
        }
    }
    let out_rows = left.map_or(a, |l| l.nrows());
    let out_cols = right.map_or(b, |r| r.ncols());
    let mut out = Array3::zeros(out_rows, n, out_cols);
    let mut tmp = vec![0.0; out_rows * b];
    for i in 0..n {
        for r in 0..out_rows {
            for c in 0..b {
                tmp[r * b + c] = match left {
                    Some(l) => dot_seq((0..a).map(|k| l[(r, k)] * array.get(k, i, c))),
                    None => array.get(r, i, c),
                };
            }
        }
        for r in 0..out_rows {
            for c in 0..out_cols {
                let v = match right {
                    Some(rt) => dot_seq((0..b).map(|k| tmp[r * b + k] * rt[(k, c)])),
                    None => tmp[r * b + c],
                };
                out.set(r, i, c, v);
            }
        }
    }
    Ok(out)
}

fn dot_seq(mut terms: impl Iterator<Item = f64>) -> f64 {
    let first = terms.next().unwrap_or(0.0);
    terms.fold(first, |acc, t| acc + t)
}

struct RegistryEntry {
    description: &'static str,
    build: fn(Design) -> Result<ModelFunction>,
    default_design: fn() -> Design,
}

/// Named model constructors addressable from the command line.
pub struct Registry {
    entries: BTreeMap<&'static str, RegistryEntry>,
}

impl Default for Registry {
    fn default() -> Self {
        Self::builtin()
    }
}

impl Registry {
    pub fn builtin() -> Self {
        let mut entries = BTreeMap::new();
        entries.insert(
            "linear",
            RegistryEntry {
                description: "x = U theta, one parameter per design column",
                build: linear_model,
                default_design: || {
                    let n = 10;
                    let m = DMatrix::from_fn(n, 2, |i, k| if k == 0 { 1.0 } else { (i + 1) as f64 });
                    Design::with_names(m, vec!["one".into(), "u".into()]).expect("static design")
                },
            },
        );
        entries.insert(
            "proportional",
            RegistryEntry {
                description: "W = k H, single predictor H and scalar k",
                build: proportional_model,
                default_design: || {
                    let h: Vec<f64> = (1..=10).map(|i| 1.5 + 0.05 * i as f64).collect();
                    Design::with_names(DMatrix::from_column_slice(10, 1, &h), vec!["H".into()]).expect("static design")
                },
            },
        );
        entries.insert(
            "sine",
            RegistryEntry {
                description: "x_i = sin(u_i . theta), box (0, pi / max_i sum_k |u_ik|)^q",
                build: sine_model,
                default_design: || Design::from_column(&[1.0, 2.0, 3.0, 4.0, 5.0]).expect("static design"),
            },
        );
        entries.insert(
            "expdecay",
            RegistryEntry {
                description: "x_i = theta_1 exp(-theta_2 u_i)",
                build: expdecay_model,
                default_design: || Design::from_column(&[1.0, 2.0, 3.0, 4.0, 5.0]).expect("static design"),
            },
        );
        Registry { entries }
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }

    pub fn describe(&self, name: &str) -> Result<&'static str> {
        self.entries
            .get(name)
            .map(|e| e.description)
            .ok_or_else(|| Error::UnknownModel(name.to_string()))
    }

    pub fn default_design(&self, name: &str) -> Result<Design> {
        self.entries
            .get(name)
            .map(|e| (e.default_design)())
            .ok_or_else(|| Error::UnknownModel(name.to_string()))
    }

    pub fn build(&self, name: &str, design: Design) -> Result<ModelFunction> {
        let entry = self.entries.get(name).ok_or_else(|| Error::UnknownModel(name.to_string()))?;
        (entry.build)(design)
    }

    pub fn build_default(&self, name: &str) -> Result<ModelFunction> {
        self.build(name, self.default_design(name)?)
    }
}

pub fn linear_model(design: Design) -> Result<ModelFunction> {
    let q = design.m();
    if q == 0 {
        return Err(Error::Shape("linear model needs at least one design column".into()));
    }
    let n = design.n();
    let mut model = ModelFunction::new("linear", design, q, |u, t| u * t)?
        .with_jacobian(|u, _| u.clone())
        .with_second(move |_, _| Array3::zeros(q, n, q));
    model.linear = true;
    Ok(model)
}

pub fn proportional_model(design: Design) -> Result<ModelFunction> {
    if design.m() != 1 {
        return Err(Error::Shape(format!("proportional model takes one predictor column, got {}", design.m())));
    }
    let n = design.n();
    let mut model = ModelFunction::new("proportional", design, 1, |u, t| u.column(0) * t[0])?
        .with_jacobian(|u, _| u.clone())
        .with_second(move |_, _| Array3::zeros(1, n, 1));
    model.linear = true;
    Ok(model)
}

pub fn sine_model(design: Design) -> Result<ModelFunction> {
    let q = design.m();
    if q == 0 {
        return Err(Error::Shape("sine model needs at least one design column".into()));
    }
    let reach = design
        .matrix()
        .row_iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let bounds = if reach > 0.0 {
        Bounds::open(vec![0.0; q], vec![PI / reach; q])
    } else {
        Bounds::default_for(q)
    };
    let n = design.n();
    ModelFunction::new("sine", design, q, |u, t| (u * t).map(f64::sin))?
        .with_jacobian(|u, t| {
            let arg = u * t;
            DMatrix::from_fn(u.nrows(), u.ncols(), |i, j| arg[i].cos() * u[(i, j)])
        })
        .with_second(move |u, t| {
            let arg = u * t;
            let mut arr = Array3::zeros(q, n, q);
            for i in 0..n {
                let s = -arg[i].sin();
                for j in 0..q {
                    for k in 0..q {
                        arr.set(j, i, k, s * u[(i, j)] * u[(i, k)]);
                    }
                }
            }
            arr
        })
        .with_bounds(bounds)
}

pub fn expdecay_model(design: Design) -> Result<ModelFunction> {
    if design.m() != 1 {
        return Err(Error::Shape(format!("expdecay model takes one predictor column, got {}", design.m())));
    }
    let n = design.n();
    Ok(ModelFunction::new("expdecay", design, 2, |u, t| u.column(0).map(|ui| t[0] * (-t[1] * ui).exp()))?
        .with_jacobian(|u, t| {
            DMatrix::from_fn(u.nrows(), 2, |i, j| {
                let ui = u[(i, 0)];
                let e = (-t[1] * ui).exp();
                if j == 0 {
                    e
                } else {
                    -t[0] * ui * e
                }
            })
        })
        .with_second(move |u, t| {
            let mut arr = Array3::zeros(2, n, 2);
            for i in 0..n {
                let ui = u[(i, 0)];
                let e = (-t[1] * ui).exp();
                arr.set(0, i, 1, -ui * e);
                arr.set(1, i, 0, -ui * e);
                arr.set(1, i, 1, t[0] * ui * ui * e);
            }
            arr
        }))
}
