//! Domain types shared by every other module: datasets with declared bounds,
//! coefficient vectors, prediction, empirical loss and the empirical
//! distributional distance between two linear models.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// One observation: covariates `x` and response `y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataPoint {
    pub x: Vec<f64>,
    pub y: f64,
}

impl DataPoint {
    pub fn new(x: Vec<f64>, y: f64) -> Self {
        Self { x, y }
    }
}

/// Declared bounds: `|x_i| <= zeta`, `|y| <= tau`, `||theta||_1 <= radius`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelBounds {
    pub zeta: f64,
    pub tau: f64,
    pub radius: f64,
}

impl ModelBounds {
    /// `tau` may be `f64::INFINITY` when responses are not bounded (publishing only).
    pub fn new(zeta: f64, tau: f64, radius: f64) -> Result<Self> {
        if !(zeta > 0.0 && zeta.is_finite()) {
            return Err(invalid("zeta", format!("must be positive and finite, got {zeta}")));
        }
        if !(tau > 0.0) || tau.is_nan() {
            return Err(invalid("tau", format!("must be positive, got {tau}")));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(invalid("radius", format!("must be positive and finite, got {radius}")));
        }
        Ok(Self { zeta, tau, radius })
    }
}

/// Coefficients of a linear model `x -> <theta, x>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CoefficientVector(Vec<f64>);

impl CoefficientVector {
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        if let Some(col) = theta.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: 0, col });
        }
        Ok(Self(theta))
    }

    pub fn zeros(d: usize) -> Self {
        Self(vec![0.0; d])
    }

    pub(crate) fn from_vec_unchecked(theta: Vec<f64>) -> Self {
        Self(theta)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn l1_norm(&self) -> f64 {
        self.0.iter().map(|v| v.abs()).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn to_dvector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.0)
    }
}

/// Rows stored row-major in `x` with responses in the parallel array `y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    dim: usize,
    x: Vec<f64>,
    y: Vec<f64>,
    bounds: ModelBounds,
    validated: bool,
}

impl Dataset {
    /// Builds a dataset, rejecting ragged rows and non-finite values.
    /// An empty point list is allowed here; operations that need data
    /// report [`Error::EmptyDataset`].
    pub fn new(dim: usize, points: Vec<DataPoint>, bounds: ModelBounds) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dim", "dimension must be at least 1"));
        }
        let mut x = Vec::with_capacity(points.len() * dim);
        let mut y = Vec::with_capacity(points.len());
        for (row, p) in points.into_iter().enumerate() {
            if p.x.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.x.len(),
                });
            }
            if let Some(col) = p.x.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { row, col });
            }
            if !p.y.is_finite() {
                return Err(Error::NonFinite { row, col: dim });
            }
            x.extend_from_slice(&p.x);
            y.push(p.y);
        }
        Ok(Self {
            dim,
            x,
            y,
            bounds,
            validated: false,
        })
    }

    /// Builds from a flat row-major covariate buffer.
    pub fn from_columns(dim: usize, x: Vec<f64>, y: Vec<f64>, bounds: ModelBounds) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dim", "dimension must be at least 1"));
        }
        if x.len() != y.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: y.len() * dim,
                found: x.len(),
            });
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: i / dim,
                col: i % dim,
            });
        }
        if let Some(row) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row, col: dim });
        }
        Ok(Self {
            dim,
            x,
            y,
            bounds,
            validated: false,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn size(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn bounds(&self) -> &ModelBounds {
        &self.bounds
    }

    pub fn is_validated(&self) -> bool {
        self.validated
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.x.chunks_exact(self.dim)
    }

    pub fn responses(&self) -> &[f64] {
        &self.y
    }

    pub fn covariates_flat(&self) -> &[f64] {
        &self.x
    }

    /// Iterator over `(x, y)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.rows().zip(self.y.iter().copied())
    }

    pub fn points(&self) -> Vec<DataPoint> {
        self.iter().map(|(x, y)| DataPoint::new(x.to_vec(), y)).collect()
    }

    /// Returns a copy carrying different bounds; the validated flag is cleared.
    pub fn with_bounds(&self, bounds: ModelBounds) -> Self {
        Self {
            bounds,
            validated: false,
            ..self.clone()
        }
    }

    /// The `m x d` covariate matrix.
    pub fn design_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.size(), self.dim, &self.x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViolationKind {
    Covariate,
    Response,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub row: usize,
    /// Covariate column; for response violations this is `dim`.
    pub col: usize,
    pub value: f64,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn covariate_violations(&self) -> usize {
        self.violations
            .iter()
            .filter(|v| v.kind == ViolationKind::Covariate)
            .count()
    }

    pub fn response_violations(&self) -> usize {
        self.violations
            .iter()
            .filter(|v| v.kind == ViolationKind::Response)
            .count()
    }
}

/// Checks every cell against the dataset's bounds and sets the `validated`
/// flag iff nothing is out of range. Calling it again yields the same report.
pub fn validate_dataset(ds: &mut Dataset) -> Result<ValidationReport> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let ModelBounds { zeta, tau, .. } = ds.bounds;
    let mut violations = Vec::new();
    for (row, (x, y)) in ds.iter().enumerate() {
        for (col, &v) in x.iter().enumerate() {
            if v.abs() > zeta {
                violations.push(Violation {
                    row,
                    col,
                    value: v,
                    kind: ViolationKind::Covariate,
                });
            }
        }
        if y.abs() > tau {
            violations.push(Violation {
                row,
                col: ds.dim,
                value: y,
                kind: ViolationKind::Response,
            });
        }
    }
    ds.validated = violations.is_empty();
    Ok(ValidationReport { violations })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

pub fn predict(theta: &CoefficientVector, x: &[f64]) -> Result<f64> {
    if theta.dim() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: theta.dim(),
            found: x.len(),
        });
    }
    Ok(dot(theta.as_slice(), x))
}

/// Mean squared residual `(<theta, x> - y)^2` over the dataset.
pub fn empirical_loss(theta: &CoefficientVector, ds: &Dataset) -> Result<f64> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if theta.dim() != ds.dim() {
        return Err(Error::DimensionMismatch {
            expected: ds.dim(),
            found: theta.dim(),
        });
    }
    let total: f64 = ds
        .iter()
        .map(|(x, y)| {
            let r = dot(theta.as_slice(), x) - y;
            r * r
        })
        .sum();
    Ok(total / ds.size() as f64)
}

/// Monte-Carlo estimate of the distributional l2 distance between two
/// linear models: `sqrt(mean_x <theta_a - theta_b, x>^2)`.
pub fn model_distance<X: AsRef<[f64]>>(
    theta_a: &CoefficientVector,
    theta_b: &CoefficientVector,
    xs: &[X],
) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if theta_a.dim() != theta_b.dim() {
        return Err(Error::DimensionMismatch {
            expected: theta_a.dim(),
            found: theta_b.dim(),
        });
    }
    let diff: Vec<f64> = theta_a
        .as_slice()
        .iter()
        .zip(theta_b.as_slice())
        .map(|(a, b)| a - b)
        .collect();
    let mut acc = 0.0;
    for x in xs {
        let x = x.as_ref();
        if x.len() != diff.len() {
            return Err(Error::DimensionMismatch {
                expected: diff.len(),
                found: x.len(),
            });
        }
        let g = dot(&diff, x);
        acc += g * g;
    }
    Ok((acc / xs.len() as f64).sqrt())
}
