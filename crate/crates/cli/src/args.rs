use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "survcred",
    version,
    about = "Publish surveys under local DP, fit noisy regressions, test survey credibility"
)]
#[command(args_override_self = true)]
pub struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Primary output file (directory for `sweep`); stdout when omitted.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Only print errors.
    #[arg(long, global = true)]
    pub quiet: bool,

    /// JSON file whose keys mirror the flags; explicit flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Generate a synthetic survey, its population and ground truth.
    Gen(GenArgs),
    /// Add calibrated noise to survey covariates.
    Publish(PublishArgs),
    /// Fit coefficients with the noise-corrected Lasso.
    Fit(FitArgs),
    /// Test whether a survey's fitted model is credible for the population.
    Verify(VerifyArgs),
    /// Evaluate a named bound.
    Bounds(Box<BoundsArgs>),
    /// Run a grid of trials and summarize.
    Sweep(SweepArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Gen(_) => "gen",
            Command::Publish(_) => "publish",
            Command::Fit(_) => "fit",
            Command::Verify(_) => "verify",
            Command::Bounds(_) => "bounds",
            Command::Sweep(_) => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GenKind {
    Synthetic1,
    Synthetic2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseArg {
    Gaussian,
    Laplace,
}

#[derive(Debug, Args, Serialize)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: GenKind,
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub m: usize,
    /// Mean of the population coefficients (synthetic1).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub mu: f64,
    /// Covariate noise family (synthetic2).
    #[arg(long, value_enum, default_value_t = NoiseArg::Gaussian)]
    pub noise: NoiseArg,
    /// Also write this many population rows as `<out>.validation.csv` (synthetic1).
    #[arg(long)]
    pub validation_rows: Option<usize>,
    /// Output path prefix.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AccountingArg {
    PerCoord,
    WholeRecord,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GaussianFormulaArg {
    /// sigma = Delta_2 sqrt(2 ln(1.25/beta)) / alpha
    Standard,
    /// sigma^2 = c zeta sqrt(ln(1/beta)) / alpha, with c from --gaussian-c
    SqrtLog,
    /// sigma^2 = 8 zeta^2 ln(1.25/beta) / alpha
    Prose,
}

#[derive(Debug, Args, Serialize)]
pub struct PublishArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    pub beta: f64,
    #[arg(long)]
    pub zeta: f64,
    /// Response bound; responses are not checked when omitted.
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long, value_enum, default_value_t = AccountingArg::PerCoord)]
    pub accounting: AccountingArg,
    #[arg(long, value_enum, default_value_t = GaussianFormulaArg::Standard)]
    pub gaussian_formula: GaussianFormulaArg,
    /// Constant of the `sqrt-log` Gaussian formula.
    #[arg(long, default_value_t = 1.0)]
    pub gaussian_c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    Constrained,
    Lagrangian,
}

#[derive(Debug, Args, Serialize)]
pub struct FitArgs {
    /// Survey CSV, or a published CSV with its `.json` sidecar.
    #[arg(long)]
    pub input: PathBuf,
    /// Noise variance per coordinate, or `from-sidecar`. Defaults to the
    /// sidecar when one exists and 0 otherwise.
    #[arg(long)]
    pub sigma_w: Option<String>,
    #[arg(long, value_enum, default_value_t = ModeArg::Constrained)]
    pub mode: ModeArg,
    /// l1 radius (constrained mode) or guard radius (lagrangian mode).
    #[arg(long)]
    pub radius: Option<f64>,
    /// Penalty; defaults to `c_pen sqrt(ln d / m)`.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub c_pen: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Fixed step size instead of the spectral rule.
    #[arg(long)]
    pub step: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossFormArg {
    LogD,
    SqrtDPlus1,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long)]
    pub survey: PathBuf,
    /// Validation CSV, or a generator spec (`.json`).
    #[arg(long)]
    pub validation: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    pub kappa: f64,
    #[arg(long)]
    pub tol: f64,
    #[arg(long)]
    pub delta: f64,
    #[arg(long)]
    pub tau: f64,
    #[arg(long)]
    pub radius: f64,
    #[arg(long)]
    pub zeta: f64,
    /// Privacy budget; selects the private test.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub beta: f64,
    #[arg(long, value_enum, default_value_t = AccountingArg::PerCoord)]
    pub accounting: AccountingArg,
    /// Declared smallest covariance eigenvalue; estimated when omitted.
    #[arg(long)]
    pub lambda_min: Option<f64>,
    #[arg(long, default_value_t = 1e-6)]
    pub lambda_min_floor: f64,
    #[arg(long, value_enum, default_value_t = LossFormArg::LogD)]
    pub loss_bound_form: LossFormArg,
    #[arg(long, default_value_t = 1.0)]
    pub c2: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c_eps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundName {
    MinSamplesGaussian,
    MinSamplesLaplace,
    ErrorBoundGaussian,
    ErrorBoundLaplace,
    ErrorBoundSubexponential,
    LowerRe,
    SuggestLambda,
    SubweibullTail,
    SquaredSubexpTail,
    SquaredSubexpThreeTerm,
    OneSidedBernstein,
    MatrixDeviation,
    MatrixDeviationLevel,
    ValidationSampleSize,
    SurveyLossBound,
    PenaltyGaussian,
    PenaltyLaplace,
}

#[derive(Debug, Args, Serialize)]
pub struct BoundsArgs {
    #[arg(long, value_enum)]
    pub bound: BoundName,
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub m: Option<f64>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub d1: Option<usize>,
    #[arg(long)]
    pub d2: Option<usize>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub zeta: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub l_hat: Option<f64>,
    #[arg(long)]
    pub lambda_min: Option<f64>,
    #[arg(long)]
    pub c_x: Option<f64>,
    #[arg(long)]
    pub c_w: Option<f64>,
    #[arg(long)]
    pub c_eps: Option<f64>,
    #[arg(long)]
    pub sigma_eps: Option<f64>,
    #[arg(long)]
    pub c_max: Option<f64>,
    #[arg(long)]
    pub second_moment: Option<f64>,
    #[arg(long)]
    pub alpha_shape: Option<f64>,
    #[arg(long)]
    pub c_alpha: Option<f64>,
    #[arg(long)]
    pub sigma_minus_sq: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    pub beta_split: f64,
    #[arg(long, value_enum, default_value_t = LossFormArg::LogD)]
    pub loss_bound_form: LossFormArg,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c1: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    ModelDistance,
    ErrorVsSamples,
    NoiseComparison,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub experiment: Experiment,
    #[arg(long, default_value_t = 20)]
    pub trials: u64,
    #[arg(long, default_value_t = 10)]
    pub d: usize,
    /// Survey size (model-distance).
    #[arg(long, default_value_t = 10_000)]
    pub m: usize,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 0.5, 1.0, 2.0])]
    pub mu_grid: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.1, 0.2])]
    pub tol_grid: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![1_000, 10_000, 100_000])]
    pub m_grid: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![2.0])]
    pub alpha_grid: Vec<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 0.0)]
    pub kappa: f64,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    /// Covariate clip level (error-vs-samples); the noise scale follows it.
    #[arg(long, default_value_t = 1.0)]
    pub zeta: f64,
    /// Fixed l1 radius; defaults to `||theta*||_1`.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}
