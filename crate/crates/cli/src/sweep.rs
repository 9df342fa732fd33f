//! Experiment grids: model-distance (close/far test decisions), estimation
//! error against survey size, and Gaussian against Laplace covariate noise.

use std::path::Path;

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use survcred::datagen::{coupled_noise_pair, gen_synthetic1, gen_synthetic2, CovariateNoise, Synthetic1, Synthetic2};
use survcred::mechanisms::{make_noise_spec, privatize, Accounting, PrivacyParams, PrivateDataset};
use survcred::solver::{corrected_moments, solve, SolverConfig};
use survcred::tester::{surverify, Decision, TestConfig};
use survcred::{CoefficientVector, RngSpec};

use crate::args::{Experiment, SweepArgs};

fn invalid(name: &'static str, reason: &str) -> survcred::Error {
    survcred::Error::InvalidParameter {
        name,
        reason: reason.to_string(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSpec {
    pub experiment: Experiment,
    pub trials: u64,
    pub seed: u64,
    pub d: usize,
    pub m: usize,
    pub mu_grid: Vec<f64>,
    pub tol_grid: Vec<f64>,
    pub m_grid: Vec<usize>,
    pub alpha_grid: Vec<f64>,
    pub beta: f64,
    pub kappa: f64,
    pub delta: f64,
    pub zeta: f64,
    pub radius: Option<f64>,
}

impl SweepSpec {
    pub fn from_args(args: &SweepArgs, seed: u64) -> Self {
        Self {
            experiment: args.experiment,
            trials: args.trials,
            seed,
            d: args.d,
            m: args.m,
            mu_grid: args.mu_grid.clone(),
            tol_grid: args.tol_grid.clone(),
            m_grid: args.m_grid.clone(),
            alpha_grid: args.alpha_grid.clone(),
            beta: args.beta,
            kappa: args.kappa,
            delta: args.delta,
            zeta: args.zeta,
            radius: args.radius,
        }
    }

    pub fn check(&self) -> survcred::Result<()> {
        if self.trials == 0 {
            return Err(invalid("trials", "must be at least 1"));
        }
        let empty = match self.experiment {
            Experiment::ModelDistance => self.mu_grid.is_empty() || self.tol_grid.is_empty(),
            Experiment::ErrorVsSamples => self.m_grid.is_empty() || self.alpha_grid.is_empty(),
            Experiment::NoiseComparison => self.m_grid.is_empty(),
        };
        if empty {
            return Err(invalid("grid", "grids must be non-empty"));
        }
        Ok(())
    }

    fn experiment_index(&self) -> u64 {
        match self.experiment {
            Experiment::ModelDistance => 0,
            Experiment::ErrorVsSamples => 1,
            Experiment::NoiseComparison => 2,
        }
    }

    fn points(&self) -> Vec<GridPoint> {
        let mut out = Vec::new();
        match self.experiment {
            Experiment::ModelDistance => {
                for &mu in &self.mu_grid {
                    for &tol in &self.tol_grid {
                        out.push(GridPoint {
                            mu: Some(mu),
                            tol: Some(tol),
                            m: self.m,
                            alpha: None,
                        });
                    }
                }
            }
            Experiment::ErrorVsSamples => {
                for &alpha in &self.alpha_grid {
                    for &m in &self.m_grid {
                        out.push(GridPoint {
                            mu: None,
                            tol: None,
                            m,
                            alpha: Some(alpha),
                        });
                    }
                }
            }
            Experiment::NoiseComparison => {
                for &m in &self.m_grid {
                    out.push(GridPoint {
                        mu: None,
                        tol: None,
                        m,
                        alpha: None,
                    });
                }
            }
        }
        out
    }

    /// Stream of one trial: `(seed, experiment, grid point, trial)`.
    pub fn trial_rng(&self, grid_index: usize, trial: u64) -> RngSpec {
        RngSpec::new(self.seed).path(&[self.experiment_index(), grid_index as u64, trial])
    }
}

#[derive(Debug, Clone, Copy)]
struct GridPoint {
    mu: Option<f64>,
    tol: Option<f64>,
    m: usize,
    alpha: Option<f64>,
}

/// One row of the tidy trial table.
#[derive(Debug, Clone, Serialize)]
pub struct TrialRecord {
    pub grid_index: usize,
    pub trial: u64,
    pub mu: Option<f64>,
    pub tol: Option<f64>,
    pub m: usize,
    pub alpha: Option<f64>,
    pub noise: Option<&'static str>,
    pub decision: Option<Decision>,
    pub gamma_s: Option<f64>,
    pub gamma_d: Option<f64>,
    pub margin: Option<f64>,
    /// `||theta_S - theta*||_2`, the model distance under standard-normal covariates.
    pub distance: Option<f64>,
    /// `||theta_hat - theta*||_2 / ||theta*||_2`.
    pub error: Option<f64>,
}

impl TrialRecord {
    fn at(grid_index: usize, trial: u64, p: &GridPoint) -> Self {
        Self {
            grid_index,
            trial,
            mu: p.mu,
            tol: p.tol,
            m: p.m,
            alpha: p.alpha,
            noise: None,
            decision: None,
            gamma_s: None,
            gamma_d: None,
            margin: None,
            distance: None,
            error: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PointSummary {
    pub grid_index: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    pub m: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub trials: u64,
    /// `ok`, or the error that aborted the point.
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accept_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reject_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_distance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_error_gaussian: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_error_laplace: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gaussian_le_laplace: Option<bool>,
}

/// Least-squares fit of `ln(mean error)` on `ln m` for one privacy level.
#[derive(Debug, Clone, Serialize)]
pub struct SlopeFit {
    pub alpha: f64,
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub experiment: Experiment,
    pub points: Vec<PointSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub slopes: Vec<SlopeFit>,
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub records: Vec<TrialRecord>,
    pub summary: SweepSummary,
}

fn normalized_error(theta_hat: &CoefficientVector, theta_star: &CoefficientVector) -> f64 {
    let diff: f64 = theta_hat
        .as_slice()
        .iter()
        .zip(theta_star.as_slice())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    diff / theta_star.l2_norm()
}

fn fit_error(noisy: &PrivateDataset, theta_star: &CoefficientVector, radius: f64) -> survcred::Result<f64> {
    let moments = corrected_moments(noisy)?;
    let fit = solve(&moments, &SolverConfig::constrained(radius))?;
    Ok(normalized_error(&fit.theta_hat, theta_star))
}

fn model_distance_trial(spec: &SweepSpec, p: &GridPoint, rec: &mut TrialRecord, rng: &RngSpec) -> survcred::Result<()> {
    let out = gen_synthetic1(&Synthetic1::new(spec.d, p.m, p.mu.unwrap_or(0.0)), &rng.child(0))?;
    let cfg = TestConfig::new(spec.kappa, p.tol.unwrap_or(0.1), spec.delta, *out.survey.bounds())?;
    let v = surverify(&out.survey, &out.star_sampler, &cfg, &rng.child(1))?;
    let dist: f64 = out
        .theta_s
        .as_slice()
        .iter()
        .zip(out.theta_star.as_slice())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    rec.decision = Some(v.decision);
    rec.gamma_s = Some(v.gamma_s);
    rec.gamma_d = Some(v.gamma_d);
    rec.margin = Some(v.margin);
    rec.distance = Some(dist);
    Ok(())
}

fn error_vs_samples_trial(
    spec: &SweepSpec,
    p: &GridPoint,
    rec: &mut TrialRecord,
    rng: &RngSpec,
) -> survcred::Result<()> {
    let cfg = Synthetic2 {
        zeta: Some(spec.zeta),
        nonzero_support: true,
        ..Synthetic2::new(spec.d, p.m, CovariateNoise::Gaussian)
    };
    let out = gen_synthetic2(&cfg, &rng.child(0))?;
    let privacy = PrivacyParams::new(p.alpha.unwrap_or(1.0), spec.beta, Accounting::PerCoordinate)?;
    let noise = make_noise_spec(&privacy, spec.zeta, spec.d)?;
    let noisy = privatize(&out.clean, &noise, Some(&privacy), &rng.child(1))?;
    let radius = spec.radius.unwrap_or(out.theta_star.l1_norm());
    rec.error = Some(fit_error(&noisy, &out.theta_star, radius)?);
    Ok(())
}

/// Both noise families see the same coefficients and clean rows, and their
/// noise is coupled through shared uniforms.
fn noise_comparison_trial(
    spec: &SweepSpec,
    p: &GridPoint,
    rec: &TrialRecord,
    rng: &RngSpec,
) -> survcred::Result<Vec<TrialRecord>> {
    let cfg = Synthetic2 {
        nonzero_support: true,
        ..Synthetic2::new(spec.d, p.m, CovariateNoise::Gaussian)
    };
    let out = gen_synthetic2(&cfg, &rng.child(0))?;
    let radius = spec.radius.unwrap_or(out.theta_star.l1_norm());
    let (gauss, lap) = coupled_noise_pair(&out.clean, &rng.child(1))?;
    [("gaussian", gauss), ("laplace", lap)]
        .into_iter()
        .map(|(name, noisy)| {
            let mut r = rec.clone();
            r.noise = Some(name);
            r.error = Some(fit_error(&noisy, &out.theta_star, radius)?);
            Ok(r)
        })
        .collect()
}

fn run_trial(spec: &SweepSpec, g: usize, p: &GridPoint, trial: u64) -> survcred::Result<Vec<TrialRecord>> {
    let rng = spec.trial_rng(g, trial);
    let mut rec = TrialRecord::at(g, trial, p);
    match spec.experiment {
        Experiment::ModelDistance => model_distance_trial(spec, p, &mut rec, &rng).map(|_| vec![rec]),
        Experiment::ErrorVsSamples => error_vs_samples_trial(spec, p, &mut rec, &rng).map(|_| vec![rec]),
        Experiment::NoiseComparison => noise_comparison_trial(spec, p, &rec, &rng),
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn summarize(spec: &SweepSpec, g: usize, p: &GridPoint, rows: &[TrialRecord]) -> PointSummary {
    let mut s = PointSummary {
        grid_index: g,
        mu: p.mu,
        tol: p.tol,
        m: p.m,
        alpha: p.alpha,
        trials: spec.trials,
        status: "ok".to_string(),
        accept_rate: None,
        reject_rate: None,
        mean_distance: None,
        mean_error: None,
        mean_error_gaussian: None,
        mean_error_laplace: None,
        gaussian_le_laplace: None,
    };
    match spec.experiment {
        Experiment::ModelDistance => {
            let n = rows.len() as f64;
            let accepts = rows.iter().filter(|r| r.decision == Some(Decision::Accept)).count() as f64;
            s.accept_rate = Some(accepts / n);
            s.reject_rate = Some(1.0 - accepts / n);
            s.mean_distance = mean(rows.iter().filter_map(|r| r.distance));
        }
        Experiment::ErrorVsSamples => {
            s.mean_error = mean(rows.iter().filter_map(|r| r.error));
        }
        Experiment::NoiseComparison => {
            let by = |k: &str| mean(rows.iter().filter(|r| r.noise == Some(k)).filter_map(|r| r.error));
            s.mean_error_gaussian = by("gaussian");
            s.mean_error_laplace = by("laplace");
            if let (Some(a), Some(b)) = (s.mean_error_gaussian, s.mean_error_laplace) {
                s.gaussian_le_laplace = Some(a <= b);
            }
        }
    }
    s
}

/// Ordinary least squares `y = intercept + slope x`.
pub fn ols(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

fn slopes(spec: &SweepSpec, points: &[PointSummary]) -> Vec<SlopeFit> {
    if spec.experiment != Experiment::ErrorVsSamples {
        return Vec::new();
    }
    spec.alpha_grid
        .iter()
        .filter_map(|&alpha| {
            let (x, y): (Vec<f64>, Vec<f64>) = points
                .iter()
                .filter(|p| p.alpha == Some(alpha))
                .filter_map(|p| p.mean_error.filter(|e| *e > 0.0).map(|e| ((p.m as f64).ln(), e.ln())))
                .unzip();
            (x.len() >= 2).then(|| {
                let (slope, intercept) = ols(&x, &y);
                SlopeFit {
                    alpha,
                    slope,
                    intercept,
                    points: x.len(),
                }
            })
        })
        .collect()
}

/// Runs every trial of every grid point on the current rayon pool. Output
/// order is by grid point, then trial.
pub fn run_sweep(spec: &SweepSpec) -> survcred::Result<SweepOutput> {
    spec.check()?;
    let points = spec.points();
    let jobs: Vec<(usize, u64)> = (0..points.len())
        .flat_map(|g| (0..spec.trials).map(move |t| (g, t)))
        .collect();
    let results: Vec<survcred::Result<Vec<TrialRecord>>> = jobs
        .par_iter()
        .map(|&(g, t)| run_trial(spec, g, &points[g], t))
        .collect();

    let mut records = Vec::new();
    let mut summaries = Vec::with_capacity(points.len());
    for (g, (p, chunk)) in points.iter().zip(results.chunks(spec.trials as usize)).enumerate() {
        match chunk.iter().find_map(|r| r.as_ref().err()) {
            Some(e) => {
                log::warn!("grid point {g} aborted: {e}");
                let mut s = summarize(spec, g, p, &[]);
                s.status = format!("error: {e}");
                s.accept_rate = None;
                s.reject_rate = None;
                summaries.push(s);
            }
            None => {
                let rows: Vec<TrialRecord> = chunk.iter().flat_map(|r| r.as_ref().unwrap().clone()).collect();
                summaries.push(summarize(spec, g, p, &rows));
                records.extend(rows);
            }
        }
    }
    let slopes = slopes(spec, &summaries);
    Ok(SweepOutput {
        records,
        summary: SweepSummary {
            experiment: spec.experiment,
            points: summaries,
            slopes,
        },
    })
}

/// Writes `trials.csv` into `dir`.
pub fn write_trials(dir: &Path, records: &[TrialRecord]) -> Result<()> {
    let path = dir.join("trials.csv");
    let mut w = csv::Writer::from_path(&path).with_context(|| format!("creating {}", path.display()))?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ols_recovers_a_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 0.5 * v).collect();
        let (s, i) = ols(&x, &y);
        assert!((s + 0.5).abs() < 1e-12 && (i - 2.0).abs() < 1e-12);
    }
}
