//! Numeric evaluators for the sample-size requirements, estimation-error
//! bounds, lower restricted-eigenvalue parameters and concentration tail
//! bounds used throughout the analysis of the noise-corrected Lasso.
//!
//! All logarithms are natural. Universal constants the analysis leaves
//! unspecified are explicit arguments (conventionally 1.0) and are echoed in
//! every [`BoundValue`].

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::mechanisms::sample_laplace;
use crate::rng::RngSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailParams {
    pub c_x: f64,
    pub c_w: f64,
    pub c_eps: f64,
    pub sigma_eps: f64,
}

impl TailParams {
    pub fn new(c_x: f64, c_w: f64, c_eps: f64, sigma_eps: f64) -> Result<Self> {
        positive("c_x", c_x)?;
        positive("c_w", c_w)?;
        positive("c_eps", c_eps)?;
        positive("sigma_eps", sigma_eps)?;
        Ok(Self {
            c_x,
            c_w,
            c_eps,
            sigma_eps,
        })
    }

    pub fn c_max(&self) -> f64 {
        self.c_x.max(self.c_w).max(self.c_eps)
    }

    pub fn c_z(&self) -> f64 {
        self.c_x + self.c_w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumInfo {
    pub lambda_min: f64,
}

impl SpectrumInfo {
    pub fn new(lambda_min: f64) -> Result<Self> {
        if !(lambda_min > 0.0 && lambda_min.is_finite()) {
            return Err(invalid("lambda_min", format!("must be positive, got {lambda_min}")));
        }
        Ok(Self { lambda_min })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerREParams {
    pub alpha_ell: f64,
    pub tau_md: f64,
    /// `tau_md <= alpha_ell / (2d)`.
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SideCondition {
    pub name: String,
    pub holds: bool,
}

/// A bound value together with the conditions and constants it was
/// evaluated under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub value: f64,
    pub side_conditions: Vec<SideCondition>,
    pub constants_used: BTreeMap<String, f64>,
    /// The raw expression exceeded 1 and was clamped (probability bounds only).
    pub vacuous: bool,
}

impl BoundValue {
    fn plain(value: f64, constants: &[(&str, f64)]) -> Self {
        Self {
            value,
            side_conditions: Vec::new(),
            constants_used: constants.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            vacuous: false,
        }
    }

    fn probability(raw: f64, constants: &[(&str, f64)]) -> Self {
        let mut b = Self::plain(raw.clamp(0.0, 1.0), constants);
        b.vacuous = raw > 1.0;
        b
    }

    fn with_condition(mut self, name: &str, holds: bool) -> Self {
        self.side_conditions.push(SideCondition {
            name: name.to_string(),
            holds,
        });
        self
    }

    pub fn side_conditions_hold(&self) -> bool {
        self.side_conditions.iter().all(|c| c.holds)
    }
}

fn need_d_at_least_2(d: usize) -> Result<f64> {
    if d < 2 {
        return Err(invalid("d", "the d ln d factor requires d >= 2"));
    }
    Ok(d as f64)
}

fn positive(name: &'static str, v: f64) -> Result<f64> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(invalid(name, format!("must be positive, got {v}")));
    }
    Ok(v)
}

fn beta_open(beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(invalid("beta", format!("must lie in (0, 1), got {beta}")));
    }
    Ok(beta)
}

/// Gamma function; exact factorials at positive integers up to 171.
pub fn gamma_fn(x: f64) -> f64 {
    if x > 0.0 && x.fract() == 0.0 && x <= 171.0 {
        return (1..x as u64).fold(1.0, |acc, k| acc * k as f64);
    }
    statrs::function::gamma::gamma(x)
}

/// Sample size for the Gaussian-mechanism estimation guarantee:
/// `ceil(max(c / lambda_min^2 * (zeta^2 + zeta^2 ln(1/beta) / alpha^2)^2 * d ln d, 1))`.
pub fn min_samples_gaussian(spec: &SpectrumInfo, zeta: f64, alpha: f64, beta: f64, d: usize, c: f64) -> Result<u64> {
    let df = need_d_at_least_2(d)?;
    let (zeta, alpha, beta) = (positive("zeta", zeta)?, positive("alpha", alpha)?, beta_open(beta)?);
    let z2 = zeta * zeta;
    let inner = z2 + z2 * (1.0 / beta).ln() / (alpha * alpha);
    let raw = c / (spec.lambda_min * spec.lambda_min) * inner * inner * df * df.ln();
    Ok(raw.max(1.0).ceil() as u64)
}

/// `max(zeta/alpha, zeta^2, c_eps)`, the scale shared by the Laplace bounds.
pub fn laplace_scale(zeta: f64, alpha: f64, c_eps: f64) -> f64 {
    (zeta / alpha).max(zeta * zeta).max(c_eps)
}

/// Sample size for the Laplace-mechanism estimation guarantee:
/// `ceil(max(max(M / lambda_min, 1) d ln d, M ln^3 d))`, `M = max(zeta/alpha, zeta^2, c_eps)`.
pub fn min_samples_laplace(spec: &SpectrumInfo, zeta: f64, alpha: f64, c_eps: f64, d: usize) -> Result<u64> {
    let df = need_d_at_least_2(d)?;
    let (zeta, alpha, c_eps) = (
        positive("zeta", zeta)?,
        positive("alpha", alpha)?,
        positive("c_eps", c_eps)?,
    );
    let scale = laplace_scale(zeta, alpha, c_eps);
    let ln_d = df.ln();
    let a = (scale / spec.lambda_min).max(1.0) * df * ln_d;
    let b = scale * ln_d.powi(3);
    Ok(a.max(b).ceil() as u64)
}

/// Upper bound on `||theta* - theta_hat||_2` under the Gaussian mechanism,
/// with `||theta*||_2` replaced by `radius`.
#[allow(clippy::too_many_arguments)]
pub fn error_bound_gaussian(
    params: &TailParams,
    spec: &SpectrumInfo,
    zeta: f64,
    alpha: f64,
    beta: f64,
    radius: f64,
    d: usize,
    m: f64,
    c2: f64,
) -> Result<f64> {
    error_bound_gaussian_sigma(params.sigma_eps, spec, zeta, alpha, beta, radius, d, m, c2)
}

/// Same bound with an explicit regression-noise scale, which may be zero
/// (tail parameters must be positive).
#[allow(clippy::too_many_arguments)]
pub fn error_bound_gaussian_sigma(
    sigma_eps: f64,
    spec: &SpectrumInfo,
    zeta: f64,
    alpha: f64,
    beta: f64,
    radius: f64,
    d: usize,
    m: f64,
    c2: f64,
) -> Result<f64> {
    let df = need_d_at_least_2(d)?;
    let (zeta, alpha, beta, m) = (
        positive("zeta", zeta)?,
        positive("alpha", alpha)?,
        beta_open(beta)?,
        positive("m", m)?,
    );
    let log_inv_beta = (1.0 / beta).ln();
    let privacy = (log_inv_beta / alpha + 1.0).sqrt();
    let noise = zeta * log_inv_beta.sqrt() / alpha + sigma_eps;
    Ok(c2 * zeta * privacy * noise / spec.lambda_min * radius * (df * df.ln() / m).sqrt())
}

/// Upper bound on `||theta* - theta_hat||_2` under the Laplace mechanism:
/// `c2 / lambda_min * max(zeta/alpha, zeta^2, c_eps) * R * sqrt(d ln d / m)`.
#[allow(clippy::too_many_arguments)]
pub fn error_bound_laplace(
    params: &TailParams,
    spec: &SpectrumInfo,
    zeta: f64,
    alpha: f64,
    radius: f64,
    d: usize,
    m: f64,
    c2: f64,
) -> Result<f64> {
    let df = need_d_at_least_2(d)?;
    let (zeta, alpha, m) = (positive("zeta", zeta)?, positive("alpha", alpha)?, positive("m", m)?);
    let scale = laplace_scale(zeta, alpha, params.c_eps);
    Ok(c2 / spec.lambda_min * scale * radius * (df * df.ln() / m).sqrt())
}

/// Generic sub-exponential bound: `c1 / lambda_min * c_max * R * sqrt(d ln d / m)`.
pub fn error_bound_subexponential(
    params: &TailParams,
    spec: &SpectrumInfo,
    radius: f64,
    d: usize,
    m: f64,
    c1: f64,
) -> Result<f64> {
    let df = need_d_at_least_2(d)?;
    let m = positive("m", m)?;
    Ok(c1 / spec.lambda_min * params.c_max() * radius * (df * df.ln() / m).sqrt())
}

/// Deterministic bound `c / alpha_ell * phi * sqrt(d ln d / m)` given the
/// deviation level `phi` and lower-RE curvature `alpha_ell`.
pub fn deviation_error_bound(alpha_ell: f64, phi: f64, d: usize, m: f64, c: f64) -> Result<f64> {
    let df = need_d_at_least_2(d)?;
    let (alpha_ell, m) = (positive("alpha_ell", alpha_ell)?, positive("m", m)?);
    Ok(c / alpha_ell * phi * (df * df.ln() / m).sqrt())
}

/// Lower-RE curvature `lambda_min / 2` and tolerance
/// `c1 lambda_min max(c_max^2 / lambda_min^2, 1) ln d / m`.
pub fn lower_re_params(spec: &SpectrumInfo, c_max: f64, m: f64, d: usize, c1: f64) -> Result<LowerREParams> {
    let df = need_d_at_least_2(d)?;
    let m = positive("m", m)?;
    let lam = spec.lambda_min;
    let alpha_ell = lam / 2.0;
    let tau_md = c1 * lam * (c_max * c_max / (lam * lam)).max(1.0) * df.ln() / m;
    Ok(LowerREParams {
        alpha_ell,
        tau_md,
        feasible: tau_md <= alpha_ell / (2.0 * df),
    })
}

/// Suggested Lagrangian penalty `c1 * c_max * R * ln^2 d / m`, from the
/// deviation bound `Phi(Z) <= c1 c_max ||theta*||_2` with `||theta*||_2 <= R`.
pub fn suggest_lambda(params: &TailParams, radius: f64, d: usize, m: f64, c1: f64) -> Result<f64> {
    let df = need_d_at_least_2(d)?;
    let m = positive("m", m)?;
    Ok(c1 * params.c_max() * radius * df.ln().powi(2) / m)
}

/// The two shape constants of the sub-Weibull right-tail bound.
pub fn subweibull_constants(alpha_shape: f64, c_alpha: f64, beta_split: f64) -> (f64, f64) {
    let base = (1.0 - beta_split) * c_alpha;
    let c1 = gamma_fn(2.0 * alpha_shape + 1.0) / base.powf(2.0 * alpha_shape);
    let c2 = beta_split * c_alpha * gamma_fn(3.0 * alpha_shape + 1.0) / (3.0 * base.powf(3.0 * alpha_shape));
    (c1, c2)
}

/// Right-tail bound `P[S_n > n t]` for sums of centered sub-Weibull variables.
pub fn subweibull_right_tail(
    n: u64,
    t: f64,
    alpha_shape: f64,
    c_alpha: f64,
    sigma_minus_sq: f64,
    beta_split: f64,
) -> Result<BoundValue> {
    if !(alpha_shape > 1.0) {
        return Err(invalid("alpha_shape", "must exceed 1"));
    }
    if !(beta_split > 0.0 && beta_split < 1.0) {
        return Err(invalid("beta_split", "must lie in (0, 1)"));
    }
    let c_alpha = positive("c_alpha", c_alpha)?;
    let nt = n as f64 * t;
    if !(nt > 0.0) {
        return Err(invalid("t", "n t must be positive"));
    }
    let (c1, c2) = subweibull_constants(alpha_shape, c_alpha, beta_split);
    let root = nt.powf(1.0 / alpha_shape);
    let denom = sigma_minus_sq + c1 + nt.powf(1.0 / alpha_shape - 1.0) * c2;
    let raw =
        (-(n as f64) * t * t / denom).exp() + (-beta_split * c_alpha * root).exp() + n as f64 * (-c_alpha * root).exp();
    Ok(BoundValue::probability(
        raw,
        &[
            ("c1(beta,alpha)", c1),
            ("c2(beta,alpha)", c2),
            ("beta_split", beta_split),
        ],
    ))
}

/// Right-tail bound for squares of sub-exponential variables, before
/// simplification: `exp(-n t^2 / (c c_x^2)) + exp(-sqrt(n t) / (4 c_x)) + n exp(-sqrt(n t) / (2 c_x))`.
pub fn squared_subexp_three_term(n: u64, t: f64, c_x: f64, c: f64) -> Result<BoundValue> {
    let c_x = positive("c_x", c_x)?;
    let nf = n as f64;
    let nt = nf * t;
    let raw = (-nf * t * t / (c * c_x * c_x)).exp()
        + (-nt.sqrt() / (4.0 * c_x)).exp()
        + nf * (-nt.sqrt() / (2.0 * c_x)).exp();
    Ok(BoundValue::probability(raw, &[("c", c)]).with_condition("n t > 1", nt > 1.0))
}

/// Two-sided concentration of the mean of squared sub-exponential
/// variables: `exp(-c n t^2 / c_x^2)`, valid when `t <= c_x^(2/3) / n^(1/3)`
/// and `n >= c_x^2 ln^3 n`.
pub fn squared_subexp_tail(n: u64, t: f64, c_x: f64, c: f64) -> Result<BoundValue> {
    if n == 0 {
        return Err(invalid("n", "must be at least 1"));
    }
    let t = positive("t", t)?;
    if !(c_x >= 1.0) {
        return Err(invalid("c_x", "must be at least 1"));
    }
    let nf = n as f64;
    let raw = (-c * nf * t * t / (c_x * c_x)).exp();
    Ok(BoundValue::probability(raw, &[("c", c)])
        .with_condition("t <= c_x^(2/3) / n^(1/3)", t <= c_x.powf(2.0 / 3.0) / nf.cbrt())
        .with_condition("n >= c_x^2 ln^3 n", nf >= c_x * c_x * nf.ln().powi(3)))
}

/// Lower-tail bound for sums of non-negative variables: `exp(-n t^2 / E[X^2])`.
pub fn one_sided_bernstein(n: u64, t: f64, second_moment: f64) -> Result<BoundValue> {
    if n == 0 {
        return Err(invalid("n", "must be at least 1"));
    }
    if !(t >= 0.0) {
        return Err(invalid("t", "must be non-negative"));
    }
    let s = positive("second_moment", second_moment)?;
    Ok(BoundValue::probability((-(n as f64) * t * t / s).exp(), &[]))
}

/// Max-norm deviation of `Y'X / n` for sub-exponential random matrices:
/// `min(1, d1 d2 exp(-c n t^2 / c_max^2))`.
pub fn matrix_deviation_bound(n: u64, d1: usize, d2: usize, c_max: f64, t: f64, c: f64) -> Result<BoundValue> {
    if n == 0 || d1 == 0 || d2 == 0 {
        return Err(invalid("n", "n, d1 and d2 must be positive"));
    }
    let c_max = positive("c_max", c_max)?;
    let nf = n as f64;
    let raw = (d1 * d2) as f64 * (-c * nf * t * t / (c_max * c_max)).exp();
    Ok(BoundValue::probability(raw, &[("c", c)])
        .with_condition("t <= c_max^(2/3) / n^(1/3)", t <= c_max.powf(2.0 / 3.0) / nf.cbrt()))
}

/// High-probability deviation level `c1 c_max sqrt(ln d / n)`.
pub fn matrix_deviation_level(n: f64, d: usize, c_max: f64, c1: f64) -> Result<f64> {
    let n = positive("n", n)?;
    if d == 0 {
        return Err(invalid("d", "must be positive"));
    }
    Ok(c1 * c_max * ((d as f64).ln() / n).sqrt())
}

/// Distributions the Monte-Carlo tail check can draw from. The summed
/// statistic is `X^2 - E[X^2]` for the squared variants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum TailSampler {
    LaplaceSquares { scale: f64 },
    GaussianSquares { std: f64 },
    PointMass { value: f64 },
}

impl TailSampler {
    fn draw_centered<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            TailSampler::LaplaceSquares { scale } => {
                let x = sample_laplace(rng, scale);
                x * x - 2.0 * scale * scale
            }
            TailSampler::GaussianSquares { std } => {
                let z: f64 = rng.sample(StandardNormal);
                let x = std * z;
                x * x - std * std
            }
            TailSampler::PointMass { value } => value,
        }
    }
}

/// Which analytic bound the empirical frequency is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "bound")]
pub enum TailBoundFn {
    SquaredSubexp {
        c_x: f64,
        c: f64,
    },
    SquaredSubexpThreeTerm {
        c_x: f64,
        c: f64,
    },
    SubWeibull {
        alpha_shape: f64,
        c_alpha: f64,
        sigma_minus_sq: f64,
        beta_split: f64,
    },
}

impl TailBoundFn {
    fn evaluate(&self, n: u64, t: f64) -> Result<BoundValue> {
        match *self {
            TailBoundFn::SquaredSubexp { c_x, c } => squared_subexp_tail(n, t, c_x, c),
            TailBoundFn::SquaredSubexpThreeTerm { c_x, c } => squared_subexp_three_term(n, t, c_x, c),
            TailBoundFn::SubWeibull {
                alpha_shape,
                c_alpha,
                sigma_minus_sq,
                beta_split,
            } => subweibull_right_tail(n, t, alpha_shape, c_alpha, sigma_minus_sq, beta_split),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SideConditionPolicy {
    /// Do not run when a side condition fails.
    Skip,
    /// Run anyway and report which side conditions failed.
    Evaluate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "status")]
pub enum TailCheckStatus {
    Pass,
    Fail,
    Skipped { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailCheckReport {
    pub n: u64,
    pub t: f64,
    pub trials: u64,
    pub exceedances: u64,
    pub frequency: f64,
    pub bound: BoundValue,
    /// `3 sqrt(bound (1 - bound) / trials)`.
    pub slack: f64,
    pub status: TailCheckStatus,
}

/// Monte-Carlo frequency of `{S_n > n t}` over `trials` independent sums,
/// compared against the analytic bound. Passes iff
/// `frequency <= bound + 3 sqrt(bound (1 - bound) / trials)`.
/// Trial `i` draws from `rng.child(i)`; trials run in parallel.
pub fn empirical_tail_check(
    sampler: &TailSampler,
    n: u64,
    t: f64,
    bound_fn: &TailBoundFn,
    trials: u64,
    rng: &RngSpec,
    policy: SideConditionPolicy,
) -> Result<TailCheckReport> {
    use rayon::prelude::*;

    if trials == 0 {
        return Err(invalid("trials", "must be at least 1"));
    }
    let bound = bound_fn.evaluate(n, t)?;
    let p = bound.value;
    let slack = 3.0 * (p * (1.0 - p) / trials as f64).sqrt();
    if policy == SideConditionPolicy::Skip && !bound.side_conditions_hold() {
        let failed: Vec<String> = bound
            .side_conditions
            .iter()
            .filter(|c| !c.holds)
            .map(|c| c.name.clone())
            .collect();
        return Ok(TailCheckReport {
            n,
            t,
            trials,
            exceedances: 0,
            frequency: f64::NAN,
            bound,
            slack,
            status: TailCheckStatus::Skipped {
                reason: format!("side conditions violated: {}", failed.join(", ")),
            },
        });
    }
    let threshold = n as f64 * t;
    let exceedances = (0..trials)
        .into_par_iter()
        .filter(|&i| {
            let mut r = rng.child(i).rng();
            let s: f64 = (0..n).map(|_| sampler.draw_centered(&mut r)).sum();
            s > threshold
        })
        .count() as u64;
    let frequency = exceedances as f64 / trials as f64;
    let status = if frequency <= p + slack {
        TailCheckStatus::Pass
    } else {
        TailCheckStatus::Fail
    };
    Ok(TailCheckReport {
        n,
        t,
        trials,
        exceedances,
        frequency,
        bound,
        slack,
        status,
    })
}
