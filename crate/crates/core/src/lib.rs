//! Local-DP survey publishing, noise-corrected Lasso and survey credibility
//! testing.
//!
//! * [`mechanisms`] perturbs survey covariates with calibrated Laplace or
//!   Gaussian noise and records the noise covariance.
//! * [`solver`] fits linear coefficients from noisy covariates by minimizing a
//!   bias-corrected quadratic over an l1 ball.
//! * [`tester`] decides whether a survey's fitted model is credibly close to
//!   the population model, using a small validation sample.
//! * [`bounds`] evaluates the sample-size, error and tail bounds behind these
//!   procedures.
//! * [`datagen`] produces the synthetic benchmarks and handles CSV files.

// `!(x > 0.0)` is used deliberately so NaN fails parameter checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod data;
pub mod datagen;
pub mod error;
pub mod mechanisms;
pub mod rng;
pub mod solver;
pub mod tester;

pub use data::{
    empirical_loss, model_distance, predict, validate_dataset, CoefficientVector, DataPoint, Dataset, ModelBounds,
    ValidationReport, Violation, ViolationKind,
};
pub use error::{Error, Result};
pub use mechanisms::{
    l1_sensitivity, l2_sensitivity, make_noise_spec, privatize, Accounting, GaussianVarianceFormula, NoiseKind,
    NoiseSpec, PrivacyParams, PrivateDataset, Provenance,
};
pub use rng::RngSpec;
pub use solver::{
    corrected_moments, objective, project_l1, soft_threshold, solve, spectral_bound, CorrectedMoments, SolveMode,
    SolveResult, SolverConfig, StepRule,
};
pub use tester::{
    decide, priverify, surverify, validation_sample_size, Decision, LambdaMin, LossBoundForm, TestConfig,
    ValidationSource, Verdict,
};
