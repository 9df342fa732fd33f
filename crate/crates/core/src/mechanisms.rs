//! Local differential privacy for survey covariates.
//!
//! Each covariate coordinate of each row gets an independent draw of
//! Laplace noise (pure `alpha`-LDP, `beta = 0`) or Gaussian noise
//! (`(alpha, beta)`-LDP, `beta > 0`). Responses are published unchanged.
//! The exact per-coordinate variance of the added noise is returned with the
//! data so that downstream regression can undo the bias it introduces.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{invalid, Error, Result};
use crate::rng::RngSpec;

/// How neighbouring inputs are defined when computing sensitivity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Accounting {
    /// Each coordinate is treated as its own release.
    #[default]
    PerCoordinate,
    /// The whole covariate vector of a respondent is the protected unit.
    WholeRecord,
}

/// Variance rule for the Gaussian branch.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "rule")]
pub enum GaussianVarianceFormula {
    /// `sigma = Delta_2 * sqrt(2 ln(1.25/beta)) / alpha`.
    #[default]
    Standard,
    /// `sigma^2 = c * zeta / alpha * sqrt(ln(1/beta))` with a free constant `c`.
    /// Not calibrated to the sensitivity; kept for comparison.
    SqrtLogLiteral { c: f64 },
    /// `sigma^2 = 8 zeta^2 / alpha * ln(1.25/beta)`: alpha enters once, not squared.
    ProseLiteral,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacyParams {
    pub alpha: f64,
    pub beta: f64,
    #[serde(default)]
    pub accounting: Accounting,
    #[serde(default)]
    pub gaussian_formula: GaussianVarianceFormula,
}

impl PrivacyParams {
    pub fn new(alpha: f64, beta: f64, accounting: Accounting) -> Result<Self> {
        let p = Self {
            alpha,
            beta,
            accounting,
            gaussian_formula: GaussianVarianceFormula::Standard,
        };
        p.check()?;
        Ok(p)
    }

    pub fn pure(alpha: f64) -> Result<Self> {
        Self::new(alpha, 0.0, Accounting::PerCoordinate)
    }

    pub fn with_gaussian_formula(mut self, formula: GaussianVarianceFormula) -> Self {
        self.gaussian_formula = formula;
        self
    }

    pub fn is_pure(&self) -> bool {
        self.beta == 0.0
    }

    pub fn check(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(invalid(
                "alpha",
                format!("must be positive and finite, got {}", self.alpha),
            ));
        }
        if !(0.0..1.0).contains(&self.beta) {
            return Err(invalid("beta", format!("must lie in [0, 1), got {}", self.beta)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "distribution")]
pub enum NoiseKind {
    Laplace { scale: f64 },
    Gaussian { std: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub per_coordinate_variance: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl NoiseSpec {
    pub fn laplace(scale: f64) -> Self {
        Self {
            kind: NoiseKind::Laplace { scale },
            per_coordinate_variance: 2.0 * scale * scale,
            warnings: Vec::new(),
        }
    }

    pub fn gaussian(std: f64) -> Self {
        Self {
            kind: NoiseKind::Gaussian { std },
            per_coordinate_variance: std * std,
            warnings: Vec::new(),
        }
    }

    /// Zero-variance noise; privatization becomes the identity.
    pub fn none() -> Self {
        Self::laplace(0.0)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.kind {
            NoiseKind::Laplace { scale } => sample_laplace(rng, scale),
            NoiseKind::Gaussian { std } => {
                let z: f64 = rng.sample(StandardNormal);
                std * z
            }
        }
    }

    /// `n` sequential draws from a single stream.
    pub fn sample_n(&self, n: usize, rng: &RngSpec) -> Vec<f64> {
        let mut r = rng.rng();
        (0..n).map(|_| self.sample(&mut r)).collect()
    }
}

/// Laplace(0, scale) by inverse CDF on a uniform draw.
pub fn sample_laplace<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> f64 {
    if scale == 0.0 {
        return 0.0;
    }
    // u in (-1/2, 1/2); u = -1/2 would map to -inf.
    let u = loop {
        let r: f64 = rng.random();
        if r > 0.0 {
            break r - 0.5;
        }
    };
    -scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
}

fn check_zeta_d(zeta: f64, d: usize) -> Result<()> {
    if !(zeta > 0.0 && zeta.is_finite()) {
        return Err(invalid("zeta", format!("must be positive and finite, got {zeta}")));
    }
    if d == 0 {
        return Err(invalid("d", "dimension must be at least 1"));
    }
    Ok(())
}

/// l1 sensitivity of publishing covariates bounded by `zeta`.
pub fn l1_sensitivity(zeta: f64, d: usize, accounting: Accounting) -> Result<f64> {
    check_zeta_d(zeta, d)?;
    Ok(match accounting {
        Accounting::PerCoordinate => 2.0 * zeta,
        Accounting::WholeRecord => 2.0 * zeta * d as f64,
    })
}

/// l2 sensitivity of publishing covariates bounded by `zeta`.
pub fn l2_sensitivity(zeta: f64, d: usize, accounting: Accounting) -> Result<f64> {
    check_zeta_d(zeta, d)?;
    Ok(match accounting {
        Accounting::PerCoordinate => 2.0 * zeta,
        Accounting::WholeRecord => 2.0 * zeta * (d as f64).sqrt(),
    })
}

/// Calibrates the noise distribution for the requested privacy level.
pub fn make_noise_spec(params: &PrivacyParams, zeta: f64, d: usize) -> Result<NoiseSpec> {
    params.check()?;
    if params.is_pure() {
        let b = l1_sensitivity(zeta, d, params.accounting)? / params.alpha;
        return Ok(NoiseSpec::laplace(b));
    }
    let (alpha, beta) = (params.alpha, params.beta);
    let variance = match params.gaussian_formula {
        GaussianVarianceFormula::Standard => {
            let delta2 = l2_sensitivity(zeta, d, params.accounting)?;
            let sigma = delta2 * (2.0 * (1.25 / beta).ln()).sqrt() / alpha;
            sigma * sigma
        }
        GaussianVarianceFormula::SqrtLogLiteral { c } => {
            check_zeta_d(zeta, d)?;
            if !(c > 0.0) {
                return Err(invalid("c", "constant must be positive"));
            }
            c * zeta / alpha * (1.0 / beta).ln().sqrt()
        }
        GaussianVarianceFormula::ProseLiteral => {
            check_zeta_d(zeta, d)?;
            8.0 * zeta * zeta / alpha * (1.25 / beta).ln()
        }
    };
    let mut spec = NoiseSpec::gaussian(variance.sqrt());
    if alpha > 1.0 {
        let msg = format!("alpha = {alpha} > 1: the classical Gaussian mechanism guarantee only covers alpha <= 1");
        log::debug!("{msg}");
        spec.warnings.push(msg);
    }
    Ok(spec)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub noise: NoiseSpec,
    pub privacy: Option<PrivacyParams>,
    pub rng: Option<RngSpec>,
}

/// Noisy covariates `z`, clean responses `y` and the exact noise covariance
/// `sigma_w * I`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrivateDataset {
    z: DMatrix<f64>,
    y: Vec<f64>,
    sigma_w: f64,
    provenance: Provenance,
}

impl PrivateDataset {
    /// Wraps externally produced noisy data with a declared diagonal noise
    /// variance `sigma_w`.
    pub fn from_parts(z: DMatrix<f64>, y: Vec<f64>, sigma_w: f64, provenance: Provenance) -> Result<Self> {
        if z.nrows() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: z.nrows(),
                found: y.len(),
            });
        }
        if z.ncols() == 0 {
            return Err(invalid("dim", "dimension must be at least 1"));
        }
        if !(sigma_w >= 0.0 && sigma_w.is_finite()) {
            return Err(invalid(
                "sigma_w",
                format!("must be a finite non-negative variance, got {sigma_w}"),
            ));
        }
        if let Some(i) = z.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: i % z.nrows(),
                col: i / z.nrows(),
            });
        }
        if let Some(row) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row, col: z.ncols() });
        }
        Ok(Self {
            z,
            y,
            sigma_w,
            provenance,
        })
    }

    pub fn z(&self) -> &DMatrix<f64> {
        &self.z
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn m(&self) -> usize {
        self.y.len()
    }

    pub fn dim(&self) -> usize {
        self.z.ncols()
    }

    /// Diagonal value of the noise covariance.
    pub fn sigma_w(&self) -> f64 {
        self.sigma_w
    }

    pub fn sigma_w_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal_element(self.dim(), self.dim(), self.sigma_w)
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.z.row(i).iter().copied().collect()
    }
}

/// Adds independent noise to every covariate coordinate.
///
/// Row `i` draws from sub-stream `rng.child(i)`, so the output does not
/// depend on how rows are scheduled across threads.
pub fn privatize(
    ds: &Dataset,
    spec: &NoiseSpec,
    params: Option<&PrivacyParams>,
    rng: &RngSpec,
) -> Result<PrivateDataset> {
    if !ds.is_validated() {
        return Err(Error::NotValidated);
    }
    let d = ds.dim();
    let mut flat = ds.covariates_flat().to_vec();
    flat.par_chunks_mut(d).enumerate().for_each(|(i, row)| {
        let mut r = rng.child(i as u64).rng();
        for v in row.iter_mut() {
            *v += spec.sample(&mut r);
        }
    });
    let z = DMatrix::from_row_slice(ds.size(), d, &flat);
    Ok(PrivateDataset {
        z,
        y: ds.responses().to_vec(),
        sigma_w: spec.per_coordinate_variance,
        provenance: Provenance {
            noise: spec.clone(),
            privacy: params.copied(),
            rng: Some(*rng),
        },
    })
}
