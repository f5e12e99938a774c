//! Parameter estimation as orthogonal projection in case space.
//!
//! Observations live in `R^n` (one axis per experimental case). A model
//! function maps parameters `theta in R^q` to predictions in the same space,
//! and least squares estimation projects the observation onto the prediction
//! surface: exactly for linear models, locally through the affine tangent
//! space for nonlinear ones. The [`sampling`] module realizes the underlying
//! random variables from a reproducible seed so that the chi-square / F
//! decomposition of the estimation error into flaw and residual can be
//! checked by Monte Carlo.

pub mod error;
pub mod estimate;
pub mod inference;
pub mod io;
pub mod model;
pub mod projection;
pub mod sampling;
pub mod validate;

pub use error::{Error, Result};
pub use estimate::{
    fit_linear, fit_nonlinear, reparametrize, tangent_frame, tangent_project, Basin, Estimate,
    FitOptions, TangentFrame, Termination,
};
pub use inference::{
    chi2_cdf, chi2_quantile, curvature_diagnostic, decompose, f_cdf, f_quantile, flaw_bound,
    flaw_bound_known_sigma, flaw_statistic, parameter_region, parameter_region_known_sigma,
    ConfidenceRegion, Decomposition, FlawStatistic,
};
pub use model::{
    evaluate, jacobian, second_derivative, slice_multiply, Array3, Bounds, Design, ModelFunction,
    Parameter, Registry,
};
pub use projection::{
    generalized_inverse, project_affine, project_subspace, split_basis, AffineSubspace,
    SubspaceBasis, SubspaceProjection,
};
pub use sampling::{
    ks_statistic, monte_carlo_study, realize, sample_outcome, MonteCarloReport, RandomVariable,
    RandomVariableModel,
};
