//! Synthetic benchmarks, explicit clipping and CSV files.
//!
//! Distribution parameters written as `N(mean, v)` are variances. Generated
//! covariates are clipped to `[-zeta, zeta]` before responses are computed,
//! and responses are then clipped to `[-tau, tau]`, so generated surveys
//! satisfy their declared bounds exactly.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{validate_dataset, CoefficientVector, DataPoint, Dataset, ModelBounds};
use crate::error::{invalid, Error, Result};
use crate::mechanisms::{sample_laplace, NoiseSpec, PrivateDataset, Provenance};
use crate::rng::RngSpec;
use crate::tester::ValidationSource;

/// Default clipping envelope, in standard deviations.
pub const ENVELOPE_SIGMAS: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "dist")]
pub enum Noise {
    Gaussian { std: f64 },
    Laplace { scale: f64 },
}

impl Noise {
    pub fn variance(&self) -> f64 {
        match *self {
            Noise::Gaussian { std } => std * std,
            Noise::Laplace { scale } => 2.0 * scale * scale,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Noise::Gaussian { std } => {
                let z: f64 = rng.sample(StandardNormal);
                std * z
            }
            Noise::Laplace { scale } => sample_laplace(rng, scale),
        }
    }

    fn check(&self) -> Result<()> {
        let v = match *self {
            Noise::Gaussian { std } => std,
            Noise::Laplace { scale } => scale,
        };
        if !(v >= 0.0 && v.is_finite()) {
            return Err(invalid("noise", format!("scale must be non-negative, got {v}")));
        }
        Ok(())
    }
}

/// Covariate-noise family for the second benchmark. Both have unit variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CovariateNoise {
    Gaussian,
    Laplace,
}

impl CovariateNoise {
    pub fn distribution(self) -> Noise {
        match self {
            CovariateNoise::Gaussian => Noise::Gaussian { std: 1.0 },
            CovariateNoise::Laplace => Noise::Laplace {
                scale: std::f64::consts::FRAC_1_SQRT_2,
            },
        }
    }

    fn noise_spec(self) -> NoiseSpec {
        match self.distribution() {
            Noise::Gaussian { std } => NoiseSpec::gaussian(std),
            Noise::Laplace { scale } => NoiseSpec::laplace(scale),
        }
    }
}

/// Population sampler for a linear model `y = <theta, x> + noise` with
/// i.i.d. `N(mean, std^2)` covariates. Serializable as a generator spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModelSource {
    pub theta: Vec<f64>,
    pub covariate_mean: f64,
    pub covariate_std: f64,
    pub reg_noise: Noise,
    /// Clip covariates to `[-c, c]` before computing responses.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clip_x: Option<f64>,
    /// Clip responses to `[-c, c]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clip_y: Option<f64>,
}

impl LinearModelSource {
    pub fn new(theta: Vec<f64>, reg_noise: Noise) -> Result<Self> {
        let s = Self {
            theta,
            covariate_mean: 0.0,
            covariate_std: 1.0,
            reg_noise,
            clip_x: None,
            clip_y: None,
        };
        s.check()?;
        Ok(s)
    }

    pub fn check(&self) -> Result<()> {
        if self.theta.is_empty() {
            return Err(invalid("theta", "needs at least one coefficient"));
        }
        if self.theta.iter().any(|v| !v.is_finite()) || !self.covariate_mean.is_finite() {
            return Err(invalid("theta", "coefficients must be finite"));
        }
        if !(self.covariate_std >= 0.0 && self.covariate_std.is_finite()) {
            return Err(invalid("covariate_std", "must be non-negative"));
        }
        for c in [self.clip_x, self.clip_y].into_iter().flatten() {
            if !(c > 0.0) {
                return Err(invalid("clip", "clip levels must be positive"));
            }
        }
        self.reg_noise.check()
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    /// One point from an already seeded generator.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> DataPoint {
        let x: Vec<f64> = (0..self.dim())
            .map(|_| {
                let z: f64 = rng.sample(StandardNormal);
                let v = self.covariate_mean + self.covariate_std * z;
                match self.clip_x {
                    Some(c) => v.clamp(-c, c),
                    None => v,
                }
            })
            .collect();
        let mut y = x.iter().zip(&self.theta).map(|(a, b)| a * b).sum::<f64>() + self.reg_noise.sample(rng);
        if let Some(c) = self.clip_y {
            y = y.clamp(-c, c);
        }
        DataPoint::new(x, y)
    }

    /// `n` rows; row `i` is drawn from `rng.child(i)`.
    pub fn sample_rows(&self, n: usize, rng: &RngSpec) -> Vec<DataPoint> {
        (0..n)
            .into_par_iter()
            .map(|i| self.sample_point(&mut rng.child(i as u64).rng()))
            .collect()
    }

    /// Standard deviation of the unclipped response.
    pub fn response_std(&self) -> f64 {
        let s2 = self.covariate_std * self.covariate_std;
        let m2 = self.covariate_mean * self.covariate_mean;
        let norm2: f64 = self.theta.iter().map(|t| t * t).sum();
        let sum: f64 = self.theta.iter().sum();
        // Var<theta, x> = s^2 |theta|^2 when coordinates are independent; the
        // mean adds no variance but shifts |y|, so include it in the envelope.
        (s2 * norm2 + m2 * sum * sum + self.reg_noise.variance()).sqrt()
    }
}

impl ValidationSource for LinearModelSource {
    fn draw(&self, n: usize, rng: &RngSpec) -> Result<Vec<DataPoint>> {
        Ok(self.sample_rows(n, rng))
    }

    fn available(&self) -> Option<usize> {
        None
    }
}

/// Clamp counts from [`clip_to_bounds`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClipReport {
    pub covariate_clamps: Vec<usize>,
    pub response_clamps: usize,
    pub rows: usize,
}

impl ClipReport {
    pub fn total(&self) -> usize {
        self.covariate_clamps.iter().sum::<usize>() + self.response_clamps
    }

    /// Fraction of covariate cells that were clamped.
    pub fn covariate_fraction(&self) -> f64 {
        let cells = self.rows * self.covariate_clamps.len();
        if cells == 0 {
            0.0
        } else {
            self.covariate_clamps.iter().sum::<usize>() as f64 / cells as f64
        }
    }
}

/// Clamps covariates to `[-zeta, zeta]` and responses to `[-tau, tau]`. The
/// result carries the new bounds and is validated.
pub fn clip_to_bounds(ds: &Dataset, zeta: f64, tau: f64) -> Result<(Dataset, ClipReport)> {
    if !(zeta > 0.0) || !(tau > 0.0) {
        return Err(invalid("zeta", "clip levels must be positive"));
    }
    let d = ds.dim();
    let mut report = ClipReport {
        covariate_clamps: vec![0; d],
        response_clamps: 0,
        rows: ds.size(),
    };
    let mut x = ds.covariates_flat().to_vec();
    for (i, v) in x.iter_mut().enumerate() {
        if v.abs() > zeta {
            *v = v.clamp(-zeta, zeta);
            report.covariate_clamps[i % d] += 1;
        }
    }
    let mut y = ds.responses().to_vec();
    for v in y.iter_mut() {
        if v.abs() > tau {
            *v = v.clamp(-tau, tau);
            report.response_clamps += 1;
        }
    }
    let bounds = ModelBounds::new(zeta, tau, ds.bounds().radius)?;
    let mut out = Dataset::from_columns(d, x, y, bounds)?;
    if !out.is_empty() {
        validate_dataset(&mut out)?;
    }
    if report.total() > 0 {
        log::info!(
            "clipped {} covariate cells and {} responses of {} rows",
            report.total() - report.response_clamps,
            report.response_clamps,
            report.rows
        );
    }
    Ok((out, report))
}

fn normal_vec<R: Rng + ?Sized>(rng: &mut R, n: usize, mean: f64, var: f64) -> Vec<f64> {
    let sd = var.sqrt();
    (0..n)
        .map(|_| {
            let z: f64 = rng.sample(StandardNormal);
            mean + sd * z
        })
        .collect()
}

fn check_sizes(d: usize, m: usize) -> Result<()> {
    if d == 0 {
        return Err(invalid("d", "dimension must be at least 1"));
    }
    if m == 0 {
        return Err(invalid("m", "need at least one row"));
    }
    Ok(())
}

/// Settings for the close/far benchmark: survey coefficients `N(0, 0.01)`,
/// population coefficients `N(mu, 0.01)`, covariates `N(0, 1)`, regression
/// noise `N(0, 0.1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Synthetic1 {
    pub d: usize,
    pub m: usize,
    pub mu: f64,
    pub coef_var: f64,
    pub noise_var: f64,
    /// Covariate clip level; default four standard deviations.
    pub zeta: Option<f64>,
    /// Response clip level; default four standard deviations of the survey response.
    pub tau: Option<f64>,
    /// l1 radius; default `max(1, 2 ||theta_S||_1)`.
    pub radius: Option<f64>,
}

impl Synthetic1 {
    pub fn new(d: usize, m: usize, mu: f64) -> Self {
        Self {
            d,
            m,
            mu,
            coef_var: 0.01,
            noise_var: 0.1,
            zeta: None,
            tau: None,
            radius: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Synthetic1Output {
    pub survey: Dataset,
    pub theta_s: CoefficientVector,
    pub theta_star: CoefficientVector,
    /// Unclipped population sampler under `theta_star`.
    pub star_sampler: LinearModelSource,
    pub clip: ClipReport,
}

/// Streams: `child(0)` coefficients, `child(1)` survey rows.
pub fn gen_synthetic1(cfg: &Synthetic1, rng: &RngSpec) -> Result<Synthetic1Output> {
    check_sizes(cfg.d, cfg.m)?;
    if !cfg.mu.is_finite() || !(cfg.coef_var >= 0.0) || !(cfg.noise_var >= 0.0) {
        return Err(invalid(
            "mu",
            "distribution parameters must be finite and variances non-negative",
        ));
    }
    let mut coef_rng = rng.child(0).rng();
    let theta_s = normal_vec(&mut coef_rng, cfg.d, 0.0, cfg.coef_var);
    let theta_star = normal_vec(&mut coef_rng, cfg.d, cfg.mu, cfg.coef_var);
    let noise = Noise::Gaussian {
        std: cfg.noise_var.sqrt(),
    };

    let survey_model = LinearModelSource::new(theta_s.clone(), noise)?;
    let zeta = cfg.zeta.unwrap_or(ENVELOPE_SIGMAS);
    let tau = cfg.tau.unwrap_or(ENVELOPE_SIGMAS * survey_model.response_std());
    let l1: f64 = theta_s.iter().map(|v| v.abs()).sum();
    let radius = cfg.radius.unwrap_or((2.0 * l1).max(1.0));
    let bounds = ModelBounds::new(zeta, tau, radius)?;

    let clipped_model = LinearModelSource {
        clip_x: Some(zeta),
        ..survey_model
    };
    let raw = Dataset::new(cfg.d, clipped_model.sample_rows(cfg.m, &rng.child(1)), bounds)?;
    let (survey, mut clip) = clip_to_bounds(&raw, zeta, tau)?;
    // Covariate clamps happened inside the sampler; count them from the raw draw.
    clip.covariate_clamps = count_at_bound(&raw, zeta);

    Ok(Synthetic1Output {
        survey,
        theta_s: CoefficientVector::new(theta_s)?,
        theta_star: CoefficientVector::new(theta_star.clone())?,
        star_sampler: LinearModelSource::new(theta_star, noise)?,
        clip,
    })
}

fn count_at_bound(ds: &Dataset, zeta: f64) -> Vec<usize> {
    let d = ds.dim();
    let mut counts = vec![0; d];
    for (i, v) in ds.covariates_flat().iter().enumerate() {
        if v.abs() == zeta {
            counts[i % d] += 1;
        }
    }
    counts
}

/// Settings for the sparse-coefficient benchmark: each coefficient is drawn
/// from `Unif(1, 10)` with probability `1/sqrt(d)` and is 0 otherwise;
/// covariates and regression noise are `N(0, 1)`; covariate noise has unit
/// variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Synthetic2 {
    pub d: usize,
    pub m: usize,
    pub noise: CovariateNoise,
    /// Covariate clip level; default four standard deviations.
    pub zeta: Option<f64>,
    /// Redraw the coefficients until at least one is non-zero.
    pub nonzero_support: bool,
}

impl Synthetic2 {
    pub fn new(d: usize, m: usize, noise: CovariateNoise) -> Self {
        Self {
            d,
            m,
            noise,
            zeta: None,
            nonzero_support: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Synthetic2Output {
    pub clean: Dataset,
    pub noisy: PrivateDataset,
    pub theta_star: CoefficientVector,
    pub clip: ClipReport,
}

/// Sparse coefficient draw. Redraws (from the same stream) while all
/// coordinates are zero if `nonzero_support` is set.
pub fn sparse_coefficients<R: Rng + ?Sized>(rng: &mut R, d: usize, nonzero_support: bool) -> Vec<f64> {
    let p = 1.0 / (d as f64).sqrt();
    loop {
        let theta: Vec<f64> = (0..d)
            .map(|_| {
                let keep: f64 = rng.random();
                let value: f64 = rng.random_range(1.0..10.0);
                if keep < p {
                    value
                } else {
                    0.0
                }
            })
            .collect();
        if !nonzero_support || theta.iter().any(|v| *v != 0.0) {
            return theta;
        }
    }
}

/// Streams: `child(0)` coefficients, `child(1)` rows, `child(2)` covariate noise.
pub fn gen_synthetic2(cfg: &Synthetic2, rng: &RngSpec) -> Result<Synthetic2Output> {
    check_sizes(cfg.d, cfg.m)?;
    let theta = sparse_coefficients(&mut rng.child(0).rng(), cfg.d, cfg.nonzero_support);
    let zeta = cfg.zeta.unwrap_or(ENVELOPE_SIGMAS);
    let model = LinearModelSource {
        clip_x: Some(zeta),
        ..LinearModelSource::new(theta.clone(), Noise::Gaussian { std: 1.0 })?
    };
    let tau = ENVELOPE_SIGMAS * model.response_std();
    let l1: f64 = theta.iter().map(|v| v.abs()).sum();
    let bounds = ModelBounds::new(zeta, tau, l1.max(1.0))?;
    let raw = Dataset::new(cfg.d, model.sample_rows(cfg.m, &rng.child(1)), bounds)?;
    let (clean, mut clip) = clip_to_bounds(&raw, zeta, tau)?;
    clip.covariate_clamps = count_at_bound(&raw, zeta);

    let spec = cfg.noise.noise_spec();
    let noisy = crate::mechanisms::privatize(&clean, &spec, None, &rng.child(2))?;
    Ok(Synthetic2Output {
        clean,
        noisy,
        theta_star: CoefficientVector::new(theta)?,
        clip,
    })
}

/// Adds unit-variance Gaussian and Laplace noise to the same clean rows,
/// driving both from shared uniforms through their inverse CDFs. Each copy
/// has the exact marginal noise law; only the pairing is shared, which makes
/// per-trial comparisons between the two families much less noisy.
/// Row `i` uses `rng.child(i)`.
pub fn coupled_noise_pair(clean: &Dataset, rng: &RngSpec) -> Result<(PrivateDataset, PrivateDataset)> {
    use statrs::distribution::{ContinuousCDF, Laplace, Normal};

    if !clean.is_validated() {
        return Err(Error::NotValidated);
    }
    let d = clean.dim();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let laplace = Laplace::new(0.0, std::f64::consts::FRAC_1_SQRT_2).expect("unit-variance laplace");
    let mut gauss = clean.covariates_flat().to_vec();
    let mut lap = gauss.clone();
    gauss
        .par_chunks_mut(d)
        .zip(lap.par_chunks_mut(d))
        .enumerate()
        .for_each(|(i, (g, l))| {
            let mut r = rng.child(i as u64).rng();
            for (a, b) in g.iter_mut().zip(l.iter_mut()) {
                let u = loop {
                    let u: f64 = r.random();
                    if u > 0.0 {
                        break u;
                    }
                };
                *a += normal.inverse_cdf(u);
                *b += laplace.inverse_cdf(u);
            }
        });
    let wrap = |flat: Vec<f64>, kind: CovariateNoise| {
        let provenance = Provenance {
            noise: kind.noise_spec(),
            privacy: None,
            rng: Some(*rng),
        };
        PrivateDataset::from_parts(
            DMatrix::from_row_slice(clean.size(), d, &flat),
            clean.responses().to_vec(),
            1.0,
            provenance,
        )
    };
    Ok((
        wrap(gauss, CovariateNoise::Gaussian)?,
        wrap(lap, CovariateNoise::Laplace)?,
    ))
}

/// Which generator a [`GeneratorSpec`] runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum GeneratorKind {
    Synthetic1 {
        mu: f64,
    },
    Synthetic2 {
        noise: CovariateNoise,
    },
    LinearCustom {
        model: LinearModelSource,
        zeta: f64,
        tau: f64,
        radius: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub d: usize,
    pub m: usize,
    pub rng: RngSpec,
}

/// Ground truth written next to generated data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_s: Option<CoefficientVector>,
    pub theta_star: CoefficientVector,
    pub bounds: ModelBounds,
    pub clip: ClipReport,
    pub variance_convention: String,
}

#[derive(Debug, Clone)]
pub struct Generated {
    pub survey: Dataset,
    pub truth: Truth,
    /// Population sampler, when the generator defines one.
    pub population: Option<LinearModelSource>,
    /// Noisy copy of the survey, when the generator produces one.
    pub noisy: Option<PrivateDataset>,
}

const VARIANCE_CONVENTION: &str = "second parameter of N(a, b) is the variance";

pub fn generate(spec: &GeneratorSpec) -> Result<Generated> {
    match &spec.kind {
        GeneratorKind::Synthetic1 { mu } => {
            let out = gen_synthetic1(&Synthetic1::new(spec.d, spec.m, *mu), &spec.rng)?;
            Ok(Generated {
                truth: Truth {
                    theta_s: Some(out.theta_s),
                    theta_star: out.theta_star,
                    bounds: *out.survey.bounds(),
                    clip: out.clip,
                    variance_convention: VARIANCE_CONVENTION.to_string(),
                },
                survey: out.survey,
                population: Some(out.star_sampler),
                noisy: None,
            })
        }
        GeneratorKind::Synthetic2 { noise } => {
            let out = gen_synthetic2(&Synthetic2::new(spec.d, spec.m, *noise), &spec.rng)?;
            Ok(Generated {
                truth: Truth {
                    theta_s: None,
                    theta_star: out.theta_star,
                    bounds: *out.clean.bounds(),
                    clip: out.clip,
                    variance_convention: VARIANCE_CONVENTION.to_string(),
                },
                survey: out.clean,
                population: None,
                noisy: Some(out.noisy),
            })
        }
        GeneratorKind::LinearCustom {
            model,
            zeta,
            tau,
            radius,
        } => {
            check_sizes(spec.d, spec.m)?;
            model.check()?;
            if model.dim() != spec.d {
                return Err(Error::DimensionMismatch {
                    expected: spec.d,
                    found: model.dim(),
                });
            }
            let bounds = ModelBounds::new(*zeta, *tau, *radius)?;
            let clipped = LinearModelSource {
                clip_x: Some(*zeta),
                ..model.clone()
            };
            let raw = Dataset::new(spec.d, clipped.sample_rows(spec.m, &spec.rng.child(1)), bounds)?;
            let (survey, mut clip) = clip_to_bounds(&raw, *zeta, *tau)?;
            clip.covariate_clamps = count_at_bound(&raw, *zeta);
            Ok(Generated {
                truth: Truth {
                    theta_s: None,
                    theta_star: CoefficientVector::new(model.theta.clone())?,
                    bounds,
                    clip,
                    variance_convention: VARIANCE_CONVENTION.to_string(),
                },
                survey,
                population: Some(model.clone()),
                noisy: None,
            })
        }
    }
}

/// Shortest decimal text that parses back to the same `f64`.
pub fn format_real(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Raw numeric table: header `x1..xd,y`.
struct Table {
    dim: usize,
    x: Vec<f64>,
    y: Vec<f64>,
}

fn read_table(path: &Path) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let header = rdr.headers()?.clone();
    let n = header.len();
    if n < 2 {
        return Err(Error::Header(format!("expected x1,...,xd,y; got {} column(s)", n)));
    }
    for (j, name) in header.iter().enumerate() {
        let want = if j + 1 == n {
            "y".to_string()
        } else {
            format!("x{}", j + 1)
        };
        if name != want {
            return Err(Error::Header(format!(
                "column {} is `{}`, expected `{}`",
                j + 1,
                name,
                want
            )));
        }
    }
    let dim = n - 1;
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec?;
        // header is line 1
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(r + 2);
        if rec.len() != n {
            return Err(Error::Parse {
                line,
                col: rec.len().min(n) + 1,
                message: format!("expected {} fields, found {}", n, rec.len()),
            });
        }
        for (j, cell) in rec.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                line,
                col: j + 1,
                message: format!("`{cell}` is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line,
                    col: j + 1,
                    message: format!("`{cell}` is not finite"),
                });
            }
            if j == dim {
                y.push(v);
            } else {
                x.push(v);
            }
        }
    }
    if y.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(Table { dim, x, y })
}

fn write_table<'a>(path: &Path, dim: usize, rows: impl Iterator<Item = (Vec<f64>, f64)> + 'a) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let header: Vec<String> = (1..=dim)
        .map(|j| format!("x{j}"))
        .chain(std::iter::once("y".to_string()))
        .collect();
    writeln!(w, "{}", header.join(","))?;
    let mut line = String::new();
    for (x, y) in rows {
        line.clear();
        for v in &x {
            line.push_str(&format_real(*v));
            line.push(',');
        }
        line.push_str(&format_real(y));
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a survey CSV. The returned dataset is not yet validated.
pub fn load_csv(path: impl AsRef<Path>, bounds: ModelBounds) -> Result<Dataset> {
    let t = read_table(path.as_ref())?;
    Dataset::from_columns(t.dim, t.x, t.y, bounds)
}

pub fn save_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    write_table(path.as_ref(), ds.dim(), ds.iter().map(|(x, y)| (x.to_vec(), y)))
}

/// Metadata stored next to a published dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub dim: usize,
    pub rows: usize,
    /// Diagonal value of the noise covariance.
    pub sigma_w: f64,
    pub provenance: Provenance,
    /// Free-form run description supplied by the caller.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<serde_json::Value>,
}

/// `<path>.json`.
pub fn sidecar_path(path: impl AsRef<Path>) -> PathBuf {
    let mut s = path.as_ref().as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Writes the noisy covariates as CSV and the sidecar as `<path>.json`.
pub fn save_private(
    pds: &PrivateDataset,
    path: impl AsRef<Path>,
    manifest: Option<serde_json::Value>,
) -> Result<Sidecar> {
    let path = path.as_ref();
    write_table(path, pds.dim(), (0..pds.m()).map(|i| (pds.row(i), pds.y()[i])))?;
    let sidecar = Sidecar {
        dim: pds.dim(),
        rows: pds.m(),
        sigma_w: pds.sigma_w(),
        provenance: pds.provenance().clone(),
        manifest,
    };
    let mut w = BufWriter::new(File::create(sidecar_path(path))?);
    serde_json::to_writer_pretty(&mut w, &sidecar)?;
    writeln!(w)?;
    w.flush()?;
    Ok(sidecar)
}

pub fn load_sidecar(path: impl AsRef<Path>) -> Result<Sidecar> {
    let file = File::open(sidecar_path(path))?;
    Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
}

/// Reads a published CSV together with its sidecar.
pub fn load_private(path: impl AsRef<Path>) -> Result<PrivateDataset> {
    let path = path.as_ref();
    let sidecar = load_sidecar(path)?;
    let t = read_table(path)?;
    if t.dim != sidecar.dim {
        return Err(Error::DimensionMismatch {
            expected: sidecar.dim,
            found: t.dim,
        });
    }
    if t.y.len() != sidecar.rows {
        return Err(Error::DimensionMismatch {
            expected: sidecar.rows,
            found: t.y.len(),
        });
    }
    let z = DMatrix::from_row_slice(t.y.len(), t.dim, &t.x);
    PrivateDataset::from_parts(z, t.y, sidecar.sigma_w, sidecar.provenance)
}

/// Reads a noisy CSV without a sidecar, with a declared noise variance.
pub fn load_noisy_csv(path: impl AsRef<Path>, sigma_w: f64) -> Result<PrivateDataset> {
    let t = read_table(path.as_ref())?;
    let z = DMatrix::from_row_slice(t.y.len(), t.dim, &t.x);
    let provenance = Provenance {
        noise: NoiseSpec {
            kind: crate::mechanisms::NoiseKind::Gaussian {
                std: sigma_w.max(0.0).sqrt(),
            },
            per_coordinate_variance: sigma_w,
            warnings: vec!["noise covariance declared by the user".to_string()],
        },
        privacy: None,
        rng: None,
    };
    PrivateDataset::from_parts(z, t.y, sigma_w, provenance)
}
