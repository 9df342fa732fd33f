//! Credibility tests for a survey's fitted linear model.
//!
//! [`surverify`] fits coefficients on the survey, bounds their population
//! loss from the survey alone, then measures the actual loss on a small
//! validation sample from the population. It rejects when the measured loss
//! exceeds the bound by more than `kappa + tol` (on the square-root scale).
//! [`priverify`] does the same on a locally privatized survey and widens the
//! bound by a privacy penalty.

use serde::{Deserialize, Serialize};

use crate::data::{empirical_loss, predict, validate_dataset, CoefficientVector, DataPoint, Dataset, ModelBounds};
use crate::error::{invalid, Error, Result};
use crate::mechanisms::{make_noise_spec, privatize, NoiseSpec, PrivacyParams, PrivateDataset};
use crate::rng::RngSpec;
use crate::solver::{corrected_moments, solve, CorrectedMoments, SolverConfig};

/// Which complexity term enters the survey loss bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossBoundForm {
    /// `sqrt(2 ln(2d))`.
    #[default]
    LogD,
    /// `sqrt(d + 1)`.
    SqrtDPlus1,
}

/// Constants the privacy penalty leaves unspecified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    pub c2: f64,
    pub c_eps: f64,
}

impl Default for BoundConstants {
    fn default() -> Self {
        Self { c2: 1.0, c_eps: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestConfig {
    pub kappa: f64,
    pub tol: f64,
    pub delta: f64,
    pub bounds: ModelBounds,
    #[serde(default)]
    pub loss_bound_form: LossBoundForm,
    #[serde(default)]
    pub constants: BoundConstants,
    pub max_iter: usize,
    pub solver_tol: f64,
}

impl TestConfig {
    pub fn new(kappa: f64, tol: f64, delta: f64, bounds: ModelBounds) -> Result<Self> {
        let cfg = Self {
            kappa,
            tol,
            delta,
            bounds,
            loss_bound_form: LossBoundForm::LogD,
            constants: BoundConstants::default(),
            max_iter: 10_000,
            solver_tol: 1e-9,
        };
        cfg.check()?;
        Ok(cfg)
    }

    pub fn with_form(mut self, form: LossBoundForm) -> Self {
        self.loss_bound_form = form;
        self
    }

    pub fn with_constants(mut self, constants: BoundConstants) -> Self {
        self.constants = constants;
        self
    }

    pub fn check(&self) -> Result<()> {
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(invalid("kappa", format!("must be non-negative, got {}", self.kappa)));
        }
        if !(self.tol > 0.0 && self.tol <= 1.0) {
            return Err(invalid("tol", format!("must lie in (0, 1], got {}", self.tol)));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(invalid("delta", format!("must lie in (0, 1], got {}", self.delta)));
        }
        if !self.bounds.tau.is_finite() {
            return Err(invalid("tau", "the test needs a finite response bound"));
        }
        if !(self.constants.c2 >= 0.0 && self.constants.c_eps > 0.0) {
            return Err(invalid("c2", "penalty constants must be non-negative (c_eps positive)"));
        }
        Ok(())
    }

    fn solver_config(&self) -> SolverConfig {
        SolverConfig::constrained(self.bounds.radius)
            .with_max_iter(self.max_iter)
            .with_tol(self.solver_tol)
    }
}

/// Independent draws from the population.
pub trait ValidationSource: Sync {
    /// Returns exactly `n` points or [`Error::InsufficientValidation`].
    fn draw(&self, n: usize, rng: &RngSpec) -> Result<Vec<DataPoint>>;

    /// How many points can be supplied, `None` when unbounded.
    fn available(&self) -> Option<usize>;
}

/// A fixed validation file: the first `n` rows are used, in order.
#[derive(Debug, Clone)]
pub struct DatasetSource {
    data: Dataset,
}

impl DatasetSource {
    pub fn new(data: Dataset) -> Self {
        Self { data }
    }
}

impl ValidationSource for DatasetSource {
    fn draw(&self, n: usize, _rng: &RngSpec) -> Result<Vec<DataPoint>> {
        if n > self.data.size() {
            return Err(Error::InsufficientValidation {
                needed: n,
                available: self.data.size(),
            });
        }
        Ok((0..n)
            .map(|i| DataPoint::new(self.data.row(i).to_vec(), self.data.responses()[i]))
            .collect())
    }

    fn available(&self) -> Option<usize> {
        Some(self.data.size())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Decision {
    Accept,
    Reject,
}

/// REJECT iff `sqrt(gamma_d) > sqrt(gamma_s) + kappa + tol`. Returns the
/// decision and the margin `sqrt(gamma_d) - sqrt(gamma_s) - kappa - tol`.
pub fn decide(gamma_d: f64, gamma_s: f64, kappa: f64, tol: f64) -> (Decision, f64) {
    let margin = gamma_d.sqrt() - gamma_s.sqrt() - kappa - tol;
    let decision = if margin > 0.0 {
        Decision::Reject
    } else {
        Decision::Accept
    };
    (decision, margin)
}

/// Source of `lambda_min(Sigma_x)` for the privacy penalty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum LambdaMin {
    Declared {
        value: f64,
    },
    /// Smallest eigenvalue of the corrected Gram matrix, floored.
    Estimate {
        floor: f64,
    },
}

impl Default for LambdaMin {
    fn default() -> Self {
        LambdaMin::Estimate { floor: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaMinUsed {
    pub value: f64,
    pub heuristic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub decision: Decision,
    pub t_used: usize,
    pub l_hat: f64,
    pub gamma_s: f64,
    pub gamma_d: f64,
    pub j_hat: f64,
    pub theta_hat: CoefficientVector,
    pub margin: f64,
    pub m: usize,
    pub d: usize,
    pub loss_bound_form: LossBoundForm,
    pub constants: BoundConstants,
    pub lambda_min: Option<LambdaMinUsed>,
    pub solver_converged: bool,
    pub notes: Vec<String>,
}

/// `ceil(tau^2 ln(4/delta) / (2 tol^2))`.
pub fn validation_sample_size(tau: f64, delta: f64, tol: f64) -> Result<usize> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(invalid("tau", format!("must be positive and finite, got {tau}")));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(invalid("delta", format!("must lie in (0, 1], got {delta}")));
    }
    if !(tol > 0.0 && tol <= 1.0) {
        return Err(invalid("tol", format!("must lie in (0, 1], got {tol}")));
    }
    let raw = tau * tau * (4.0 / delta).ln() / (2.0 * tol * tol);
    // Values that are integers up to rounding noise must not round up.
    let nearest = raw.round();
    let t = if (raw - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest
    } else {
        raw.ceil()
    };
    Ok((t as usize).max(1))
}

/// `L + 8 tau zeta R^2 g(d) / sqrt(m) + 3 tau sqrt(ln(4/delta) / (2m))` with
/// `g(d) = sqrt(2 ln 2d)` or `sqrt(d + 1)`.
pub fn survey_loss_bound(
    l_hat: f64,
    m: usize,
    d: usize,
    bounds: &ModelBounds,
    delta: f64,
    form: LossBoundForm,
) -> Result<f64> {
    if !(l_hat >= 0.0) {
        return Err(invalid("l_hat", format!("must be non-negative, got {l_hat}")));
    }
    if m == 0 || d == 0 {
        return Err(invalid("m", "m and d must be positive"));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(invalid("delta", format!("must lie in (0, 1], got {delta}")));
    }
    let ModelBounds { zeta, tau, radius } = *bounds;
    let mf = m as f64;
    let df = d as f64;
    let complexity = match form {
        LossBoundForm::LogD => (2.0 * (2.0 * df).ln()).sqrt(),
        LossBoundForm::SqrtDPlus1 => (df + 1.0).sqrt(),
    };
    let rademacher = 8.0 * tau * zeta * radius * radius * complexity / mf.sqrt();
    let hoeffding = 3.0 * tau * ((4.0 / delta).ln() / (2.0 * mf)).sqrt();
    Ok(l_hat + rademacher + hoeffding)
}

fn penalty_common(bounds: &ModelBounds, lambda_min: f64, m: f64, d: usize) -> Result<f64> {
    if !(lambda_min > 0.0) {
        return Err(invalid("lambda_min", format!("must be positive, got {lambda_min}")));
    }
    if !(m > 0.0) || d == 0 {
        return Err(invalid("m", "m and d must be positive"));
    }
    let df = d as f64;
    Ok(bounds.radius * (df * df.ln() / m).sqrt())
}

/// Privacy penalty under the Gaussian mechanism:
/// `2 c2 zeta^3 / lambda_min * sqrt(ln 1/beta) / alpha * (ln(1/beta)/alpha + 1) * R sqrt(d ln d / m)`.
/// Zero when `d = 1`.
pub fn privacy_penalty_gaussian(
    bounds: &ModelBounds,
    alpha: f64,
    beta: f64,
    lambda_min: f64,
    m: f64,
    d: usize,
    c2: f64,
) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(invalid("beta", format!("must lie in (0, 1), got {beta}")));
    }
    if !(alpha > 0.0) {
        return Err(invalid("alpha", format!("must be positive, got {alpha}")));
    }
    let tail = penalty_common(bounds, lambda_min, m, d)?;
    let l = (1.0 / beta).ln();
    let zeta = bounds.zeta;
    Ok(2.0 * c2 * zeta.powi(3) / lambda_min * l.sqrt() / alpha * (l / alpha + 1.0) * tail)
}

/// Privacy penalty under the Laplace mechanism:
/// `c2 zeta / lambda_min * max(zeta/alpha, zeta^2, c_eps) * R sqrt(d ln d / m)`.
/// Zero when `d = 1`.
pub fn privacy_penalty_laplace(
    bounds: &ModelBounds,
    alpha: f64,
    c_eps: f64,
    lambda_min: f64,
    m: f64,
    d: usize,
    c2: f64,
) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(invalid("alpha", format!("must be positive, got {alpha}")));
    }
    let tail = penalty_common(bounds, lambda_min, m, d)?;
    let zeta = bounds.zeta;
    let scale = (zeta / alpha).max(zeta * zeta).max(c_eps);
    Ok(c2 * zeta / lambda_min * scale * tail)
}

fn check_survey(survey: &Dataset, cfg: &TestConfig) -> Result<()> {
    cfg.check()?;
    if !survey.is_validated() {
        return Err(Error::NotValidated);
    }
    if survey.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if survey.bounds() != &cfg.bounds {
        let mut copy = survey.with_bounds(cfg.bounds);
        if !validate_dataset(&mut copy)?.is_clean() {
            return Err(Error::NotValidated);
        }
    }
    Ok(())
}

fn range_note(cfg: &TestConfig, d: usize) -> Option<String> {
    let ModelBounds { zeta, tau, radius } = cfg.bounds;
    let limit = tau / (zeta * ((d + 1) as f64).sqrt());
    if radius > limit {
        let msg = format!(
            "radius {radius} exceeds tau/(zeta sqrt(d+1)) = {limit:.6}; fitted predictions may leave [-tau, tau]"
        );
        log::debug!("{msg}");
        Some(msg)
    } else {
        None
    }
}

/// Draws `t` validation points and returns the mean squared loss of `theta`
/// on them, plus the number of responses outside `[-tau, tau]`.
fn validation_loss(
    source: &dyn ValidationSource,
    theta: &CoefficientVector,
    t: usize,
    tau: f64,
    rng: &RngSpec,
) -> Result<(f64, usize)> {
    if let Some(avail) = source.available() {
        if avail < t {
            return Err(Error::InsufficientValidation {
                needed: t,
                available: avail,
            });
        }
    }
    let points = source.draw(t, rng)?;
    if points.len() < t {
        return Err(Error::InsufficientValidation {
            needed: t,
            available: points.len(),
        });
    }
    let mut sum = 0.0;
    let mut outside = 0;
    for p in &points {
        let r = predict(theta, &p.x)? - p.y;
        sum += r * r;
        if p.y.abs() > tau {
            outside += 1;
        }
    }
    Ok((sum / t as f64, outside))
}

fn validation_stream(rng: &RngSpec) -> RngSpec {
    rng.child(0)
}

fn privatization_stream(rng: &RngSpec) -> RngSpec {
    rng.child(1)
}

/// Public-data credibility test.
pub fn surverify(survey: &Dataset, source: &dyn ValidationSource, cfg: &TestConfig, rng: &RngSpec) -> Result<Verdict> {
    check_survey(survey, cfg)?;
    let (m, d) = (survey.size(), survey.dim());
    let moments = CorrectedMoments::from_dataset(survey)?;
    let fit = solve(&moments, &cfg.solver_config())?;
    let l_hat = empirical_loss(&fit.theta_hat, survey)?;
    let gamma_s = survey_loss_bound(l_hat, m, d, &cfg.bounds, cfg.delta, cfg.loss_bound_form)?;
    finish(
        survey_context(m, d, cfg),
        fit.theta_hat,
        fit.converged,
        l_hat,
        gamma_s,
        0.0,
        None,
        source,
        rng,
    )
}

struct Context<'a> {
    m: usize,
    d: usize,
    cfg: &'a TestConfig,
    notes: Vec<String>,
}

fn survey_context(m: usize, d: usize, cfg: &TestConfig) -> Context<'_> {
    Context {
        m,
        d,
        cfg,
        notes: range_note(cfg, d).into_iter().collect(),
    }
}

#[allow(clippy::too_many_arguments)]
fn finish(
    mut ctx: Context<'_>,
    theta_hat: CoefficientVector,
    converged: bool,
    l_hat: f64,
    gamma_s: f64,
    j_hat: f64,
    lambda_min: Option<LambdaMinUsed>,
    source: &dyn ValidationSource,
    rng: &RngSpec,
) -> Result<Verdict> {
    let cfg = ctx.cfg;
    let t = validation_sample_size(cfg.bounds.tau, cfg.delta, cfg.tol)?;
    let (gamma_d, outside) = validation_loss(source, &theta_hat, t, cfg.bounds.tau, &validation_stream(rng))?;
    if outside > 0 {
        let msg = format!("{outside} of {t} validation responses lie outside [-tau, tau]");
        log::debug!("{msg}");
        ctx.notes.push(msg);
    }
    if !converged {
        ctx.notes
            .push("solver stopped at max_iter before converging".to_string());
    }
    let (decision, margin) = decide(gamma_d, gamma_s, cfg.kappa, cfg.tol);
    Ok(Verdict {
        decision,
        t_used: t,
        l_hat,
        gamma_s,
        gamma_d,
        j_hat,
        theta_hat,
        margin,
        m: ctx.m,
        d: ctx.d,
        loss_bound_form: cfg.loss_bound_form,
        constants: cfg.constants,
        lambda_min,
        solver_converged: converged,
        notes: ctx.notes,
    })
}

/// Credibility test on a locally privatized survey. The survey is
/// privatized with the noise calibrated to `privacy`; the privacy penalty
/// follows the Gaussian form when `beta > 0` and the Laplace form otherwise.
pub fn priverify(
    survey: &Dataset,
    source: &dyn ValidationSource,
    cfg: &TestConfig,
    privacy: &PrivacyParams,
    lambda_min: LambdaMin,
    rng: &RngSpec,
) -> Result<Verdict> {
    let noise = make_noise_spec(privacy, cfg.bounds.zeta, survey.dim())?;
    priverify_with_noise(survey, source, cfg, privacy, &noise, lambda_min, rng)
}

/// [`priverify`] with an explicit noise distribution, e.g. zero noise.
pub fn priverify_with_noise(
    survey: &Dataset,
    source: &dyn ValidationSource,
    cfg: &TestConfig,
    privacy: &PrivacyParams,
    noise: &NoiseSpec,
    lambda_min: LambdaMin,
    rng: &RngSpec,
) -> Result<Verdict> {
    check_survey(survey, cfg)?;
    let published = privatize(survey, noise, Some(privacy), &privatization_stream(rng))?;
    priverify_published(&published, source, cfg, privacy, lambda_min, rng)
}

/// Credibility test on already published data.
pub fn priverify_published(
    published: &PrivateDataset,
    source: &dyn ValidationSource,
    cfg: &TestConfig,
    privacy: &PrivacyParams,
    lambda_min: LambdaMin,
    rng: &RngSpec,
) -> Result<Verdict> {
    cfg.check()?;
    privacy.check()?;
    let (m, d) = (published.m(), published.dim());
    let moments = corrected_moments(published)?;
    let fit = solve(&moments, &cfg.solver_config())?;

    let theta = fit.theta_hat.as_slice();
    let z = published.z();
    let l_hat = published
        .y()
        .iter()
        .enumerate()
        .map(|(i, y)| {
            let r = z.row(i).iter().zip(theta).map(|(a, b)| a * b).sum::<f64>() - y;
            r * r
        })
        .sum::<f64>()
        / m as f64;

    let mut ctx = survey_context(m, d, cfg);
    let lam = match lambda_min {
        LambdaMin::Declared { value } => {
            if !(value > 0.0 && value.is_finite()) {
                return Err(invalid("lambda_min", format!("must be positive, got {value}")));
            }
            LambdaMinUsed {
                value,
                heuristic: false,
            }
        }
        LambdaMin::Estimate { floor } => {
            if !(floor > 0.0) {
                return Err(invalid("lambda_min", "estimate floor must be positive"));
            }
            ctx.notes
                .push("lambda_min estimated from the corrected Gram matrix (heuristic)".to_string());
            LambdaMinUsed {
                value: moments.min_eigenvalue().max(floor),
                heuristic: true,
            }
        }
    };
    let c = cfg.constants;
    let j_hat = if privacy.is_pure() {
        privacy_penalty_laplace(&cfg.bounds, privacy.alpha, c.c_eps, lam.value, m as f64, d, c.c2)?
    } else {
        privacy_penalty_gaussian(&cfg.bounds, privacy.alpha, privacy.beta, lam.value, m as f64, d, c.c2)?
    };
    if d == 1 {
        ctx.notes
            .push("d = 1: the privacy penalty vanishes because ln d = 0".to_string());
    }
    let gamma_s = survey_loss_bound(l_hat, m, d, &cfg.bounds, cfg.delta, cfg.loss_bound_form)? + j_hat;
    finish(
        ctx,
        fit.theta_hat,
        fit.converged,
        l_hat,
        gamma_s,
        j_hat,
        Some(lam),
        source,
        rng,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::Accounting;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn unit_bounds() -> ModelBounds {
        ModelBounds::new(1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn sample_size_examples() {
        let delta = 4.0 * (-2.0f64).exp();
        assert_eq!(validation_sample_size(1.0, delta, 1.0).unwrap(), 1);
        assert_eq!(validation_sample_size(1.0, 0.1, 0.1).unwrap(), 185);
        assert_eq!(validation_sample_size(2.0, 0.1, 0.1).unwrap(), 738);
        assert!(validation_sample_size(1.0, 0.0, 0.1).is_err());
        assert!(validation_sample_size(1.0, 0.1, 1.5).is_err());
    }

    #[test]
    fn survey_bound_examples() {
        let v = survey_loss_bound(0.5, 10_000, 10, &unit_bounds(), 0.1, LossBoundForm::LogD).unwrap();
        assert_relative_eq!(v, 0.7365627919, epsilon = 1e-9);
        let v = survey_loss_bound(0.0, 1, 1, &unit_bounds(), 1.0, LossBoundForm::LogD).unwrap();
        assert_relative_eq!(v, 11.9169440136, epsilon = 1e-9);
        let far = survey_loss_bound(0.25, usize::MAX, 10, &unit_bounds(), 0.1, LossBoundForm::LogD).unwrap();
        assert!((far - 0.25).abs() < 1e-7);
        let alt = survey_loss_bound(0.0, 100, 3, &unit_bounds(), 1.0, LossBoundForm::SqrtDPlus1).unwrap();
        assert_relative_eq!(
            alt,
            8.0 * 2.0 / 10.0 + 3.0 * (4f64.ln() / 200.0).sqrt(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn gaussian_penalty_examples() {
        let b = (-1.0f64).exp();
        let j = privacy_penalty_gaussian(&unit_bounds(), 1.0, b, 1.0, 9.0, 3, 1.0).unwrap();
        assert_relative_eq!(j, 2.4205919812, epsilon = 1e-9);
        let near_one = privacy_penalty_gaussian(&unit_bounds(), 1.0, 1.0 - 1e-15, 1.0, 9.0, 3, 1.0).unwrap();
        assert!(near_one < 1e-6);
        let big_m = privacy_penalty_gaussian(&unit_bounds(), 1.0, b, 1.0, 1e300, 3, 1.0).unwrap();
        assert!(big_m < 1e-8);
        assert_eq!(
            privacy_penalty_gaussian(&unit_bounds(), 1.0, b, 1.0, 9.0, 1, 1.0).unwrap(),
            0.0
        );
    }

    #[test]
    fn laplace_penalty_examples() {
        let m = 3.0 * 3f64.ln();
        let j = privacy_penalty_laplace(&unit_bounds(), 0.5, 1.0, 1.0, m, 3, 1.0).unwrap();
        assert_relative_eq!(j, 2.0, max_relative = 1e-14);
        let j1 = privacy_penalty_laplace(&unit_bounds(), 1e12, 1.0, 1.0, 100.0, 3, 1.0).unwrap();
        let j2 = privacy_penalty_laplace(&unit_bounds(), 1e15, 1.0, 1.0, 100.0, 3, 1.0).unwrap();
        assert_eq!(j1, j2);
        assert!(privacy_penalty_laplace(&unit_bounds(), 0.5, 1.0, 1.0, 1e300, 3, 1.0).unwrap() < 1e-8);
    }

    struct ReplaySource {
        points: Vec<DataPoint>,
    }

    impl ValidationSource for ReplaySource {
        fn draw(&self, n: usize, _rng: &RngSpec) -> Result<Vec<DataPoint>> {
            Ok(self.points.iter().cycle().take(n).cloned().collect())
        }

        fn available(&self) -> Option<usize> {
            None
        }
    }

    fn line_survey(m: usize, slope: f64, bounds: ModelBounds) -> Dataset {
        let pts = (0..m)
            .map(|i| {
                let x = (i as f64 / m as f64) * 2.0 - 1.0;
                DataPoint::new(vec![x], slope * x)
            })
            .collect();
        let mut ds = Dataset::new(1, pts, bounds).unwrap();
        assert!(validate_dataset(&mut ds).unwrap().is_clean());
        ds
    }

    #[test]
    fn replaying_the_survey_accepts() {
        let bounds = ModelBounds::new(1.0, 1.0, 1.0).unwrap();
        let survey = line_survey(200, 0.5, bounds);
        let source = ReplaySource {
            points: survey.points(),
        };
        let cfg = TestConfig::new(0.0, 0.1, 0.1, bounds).unwrap();
        let v = surverify(&survey, &source, &cfg, &RngSpec::new(0)).unwrap();
        assert_eq!(v.decision, Decision::Accept);
        assert!(v.gamma_d <= v.gamma_s);
        assert!(v.margin <= -cfg.tol);
        assert_eq!(v.t_used, validation_sample_size(1.0, 0.1, 0.1).unwrap());
    }

    #[test]
    fn far_population_rejects() {
        let bounds = ModelBounds::new(1.0, 1.0, 1.0).unwrap();
        let survey = line_survey(100_000, 0.5, bounds);
        let points = (0..50)
            .map(|i| DataPoint::new(vec![1.0], if i % 2 == 0 { 20.0 } else { -20.0 }))
            .collect();
        let source = ReplaySource { points };
        let cfg = TestConfig::new(0.0, 0.1, 0.1, bounds).unwrap();
        let v = surverify(&survey, &source, &cfg, &RngSpec::new(0)).unwrap();
        assert_eq!(v.decision, Decision::Reject);
        assert!(v.margin > 0.0);
        assert_eq!(v.notes.iter().filter(|n| n.contains("outside")).count(), 1);
    }

    #[test]
    fn short_validation_file_is_an_error() {
        let bounds = unit_bounds();
        let survey = line_survey(50, 0.5, bounds);
        let source = DatasetSource::new(line_survey(10, 0.5, bounds));
        let cfg = TestConfig::new(0.0, 0.1, 0.1, bounds).unwrap();
        match surverify(&survey, &source, &cfg, &RngSpec::new(0)) {
            Err(Error::InsufficientValidation {
                needed: 185,
                available: 10,
            }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn dataset_source_takes_leading_rows() {
        let ds = line_survey(300, 0.5, unit_bounds());
        let pts = DatasetSource::new(ds.clone()).draw(3, &RngSpec::new(9)).unwrap();
        assert_eq!(pts[2].x, ds.row(2).to_vec());
    }

    #[test]
    fn unvalidated_survey_is_rejected() {
        let ds = Dataset::new(1, vec![DataPoint::new(vec![0.1], 0.1)], unit_bounds()).unwrap();
        let cfg = TestConfig::new(0.0, 0.1, 0.1, unit_bounds()).unwrap();
        let source = ReplaySource { points: ds.points() };
        assert!(matches!(
            surverify(&ds, &source, &cfg, &RngSpec::new(0)),
            Err(Error::NotValidated)
        ));
    }

    #[test]
    fn zero_noise_private_test_matches_public_test() {
        let bounds = ModelBounds::new(1.0, 1.0, 0.3).unwrap();
        let pts = (0..500)
            .map(|i| {
                let a = ((i * 37) % 101) as f64 / 50.0 - 1.0;
                let b = ((i * 53) % 97) as f64 / 48.0 - 1.0;
                DataPoint::new(
                    vec![a, b],
                    (0.2 * a - 0.1 * b + 0.05 * ((i % 7) as f64 - 3.0)).clamp(-1.0, 1.0),
                )
            })
            .collect();
        let mut survey = Dataset::new(2, pts, bounds).unwrap();
        validate_dataset(&mut survey).unwrap();
        let source = ReplaySource {
            points: survey.points(),
        };
        let cfg = TestConfig::new(0.05, 0.2, 0.1, bounds)
            .unwrap()
            .with_constants(BoundConstants { c2: 0.0, c_eps: 1.0 });
        let rng = RngSpec::new(11);
        let public = surverify(&survey, &source, &cfg, &rng).unwrap();
        let privacy = PrivacyParams::new(1.0, 0.0, Accounting::PerCoordinate).unwrap();
        let private = priverify_with_noise(
            &survey,
            &source,
            &cfg,
            &privacy,
            &NoiseSpec::none(),
            LambdaMin::Declared { value: 1.0 },
            &rng,
        )
        .unwrap();
        assert_eq!(private.j_hat, 0.0);
        assert_eq!(private.decision, public.decision);
        assert_eq!(private.theta_hat, public.theta_hat);
        assert_eq!(private.l_hat, public.l_hat);
        assert_eq!(private.gamma_s, public.gamma_s);
        assert_eq!(private.gamma_d, public.gamma_d);
    }

    #[test]
    fn private_penalty_widens_the_bound() {
        let bounds = ModelBounds::new(1.0, 1.0, 0.3).unwrap();
        let survey = line_survey(400, 0.2, bounds);
        let source = ReplaySource {
            points: survey.points(),
        };
        let cfg = TestConfig::new(0.0, 0.2, 0.1, bounds).unwrap();
        let privacy = PrivacyParams::new(2.0, 0.0, Accounting::PerCoordinate).unwrap();
        let v = priverify(&survey, &source, &cfg, &privacy, LambdaMin::default(), &RngSpec::new(5)).unwrap();
        assert!(v.lambda_min.unwrap().heuristic);
        assert!(v.gamma_s >= v.l_hat);
        assert!(v.notes.iter().any(|n| n.contains("ln d = 0")));
    }

    #[test]
    fn radius_range_warning() {
        let bounds = ModelBounds::new(1.0, 1.0, 5.0).unwrap();
        let survey = line_survey(100, 0.5, bounds);
        let source = ReplaySource {
            points: survey.points(),
        };
        let cfg = TestConfig::new(0.0, 0.5, 0.5, bounds).unwrap();
        let v = surverify(&survey, &source, &cfg, &RngSpec::new(0)).unwrap();
        assert!(v.notes.iter().any(|n| n.contains("radius")));
    }

    proptest! {
        #[test]
        fn decision_rule(gd in 0.0f64..50.0, gs in 0.0f64..50.0, kappa in 0.0f64..3.0, tol in 1e-3f64..1.0) {
            let (dec, margin) = decide(gd, gs, kappa, tol);
            prop_assert_eq!(dec == Decision::Reject, gd.sqrt() > gs.sqrt() + kappa + tol);
            prop_assert_eq!(dec == Decision::Reject, margin > 0.0);
            if gd <= gs {
                prop_assert_eq!(dec, Decision::Accept);
            }
        }

        #[test]
        fn larger_kappa_or_tol_never_rejects_more(
            gd in 0.0f64..50.0, gs in 0.0f64..50.0, kappa in 0.0f64..3.0, tol in 1e-3f64..0.5,
            dk in 0.0f64..2.0, dt in 0.0f64..0.5,
        ) {
            let (before, _) = decide(gd, gs, kappa, tol);
            let (after, _) = decide(gd, gs, kappa + dk, tol + dt);
            if before == Decision::Accept {
                prop_assert_eq!(after, Decision::Accept);
            }
        }

        #[test]
        fn survey_bound_dominates_loss(l in 0.0f64..10.0, m in 1usize..1_000_000, d in 1usize..500, delta in 1e-6f64..1.0) {
            for form in [LossBoundForm::LogD, LossBoundForm::SqrtDPlus1] {
                prop_assert!(survey_loss_bound(l, m, d, &unit_bounds(), delta, form).unwrap() >= l);
            }
        }
    }
}
