//! Noise-corrected Lasso.
//!
//! Builds the bias-corrected moments `Gamma = Z'Z/m - Sigma_w` and
//! `gamma = Z'y/m`, then minimizes `1/2 t'Gamma t - <gamma, t>` over the l1
//! ball (projected gradient) or with an l1 penalty (proximal gradient).
//! `Gamma` may be indefinite once the noise covariance is subtracted; the
//! iteration then converges to a stationary point on the ball.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::{CoefficientVector, Dataset};
use crate::error::{invalid, Error, Result};
use crate::mechanisms::PrivateDataset;

#[derive(Debug, Clone, PartialEq)]
pub struct CorrectedMoments {
    gamma_matrix: DMatrix<f64>,
    gamma_vector: DVector<f64>,
    m: usize,
}

impl CorrectedMoments {
    /// Takes ownership of `gamma_matrix` and symmetrizes it.
    pub fn new(gamma_matrix: DMatrix<f64>, gamma_vector: DVector<f64>, m: usize) -> Result<Self> {
        let d = gamma_vector.len();
        if gamma_matrix.nrows() != d || gamma_matrix.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: gamma_matrix.nrows(),
            });
        }
        if d == 0 {
            return Err(invalid("dim", "dimension must be at least 1"));
        }
        Ok(Self {
            gamma_matrix: symmetrize(gamma_matrix),
            gamma_vector,
            m,
        })
    }

    /// Ordinary least-squares moments of a clean dataset (`Sigma_w = 0`).
    pub fn from_dataset(ds: &Dataset) -> Result<Self> {
        if ds.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let x = ds.design_matrix();
        let y = DVector::from_column_slice(ds.responses());
        moments_from(&x, &y, 0.0)
    }

    pub fn gamma_matrix(&self) -> &DMatrix<f64> {
        &self.gamma_matrix
    }

    pub fn gamma_vector(&self) -> &DVector<f64> {
        &self.gamma_vector
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.gamma_vector.len()
    }

    /// Smallest eigenvalue of the corrected Gram matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        self.gamma_matrix
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

fn symmetrize(a: DMatrix<f64>) -> DMatrix<f64> {
    let t = a.transpose();
    (a + t) * 0.5
}

fn moments_from(z: &DMatrix<f64>, y: &DVector<f64>, sigma_w: f64) -> Result<CorrectedMoments> {
    let m = z.nrows();
    let inv_m = 1.0 / m as f64;
    let mut gram = z.tr_mul(z) * inv_m;
    for i in 0..gram.nrows() {
        gram[(i, i)] -= sigma_w;
    }
    let cross = z.tr_mul(y) * inv_m;
    CorrectedMoments::new(gram, cross, m)
}

/// `Gamma = Z'Z/m - Sigma_w` (symmetrized) and `gamma = Z'y/m`.
pub fn corrected_moments(pds: &PrivateDataset) -> Result<CorrectedMoments> {
    if pds.m() == 0 {
        return Err(Error::EmptyDataset);
    }
    let y = DVector::from_column_slice(pds.y());
    moments_from(pds.z(), &y, pds.sigma_w())
}

/// Euclidean projection onto `{u : ||u||_1 <= radius}`.
///
/// Sort-based: finds the soft-threshold level `theta` with
/// `sum max(|v_i| - theta, 0) = radius`.
pub fn project_l1(v: &[f64], radius: f64) -> Vec<f64> {
    assert!(radius > 0.0, "radius must be positive");
    let l1: f64 = v.iter().map(|x| x.abs()).sum();
    if l1 <= radius {
        return v.to_vec();
    }
    let mut mags: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    mags.sort_unstable_by(|a, b| b.partial_cmp(a).expect("finite input"));
    let mut cumsum = 0.0;
    let mut level = 0.0;
    for (k, &u) in mags.iter().enumerate() {
        cumsum += u;
        let candidate = (cumsum - radius) / (k + 1) as f64;
        if u > candidate {
            level = candidate;
        } else {
            break;
        }
    }
    soft_threshold(v, level)
}

/// Coordinate-wise `sign(v_i) * max(|v_i| - level, 0)`.
pub fn soft_threshold(v: &[f64], level: f64) -> Vec<f64> {
    assert!(level >= 0.0, "threshold level must be non-negative");
    v.iter()
        .map(|&x| x.signum() * (x.abs() - level).max(0.0))
        .map(|x| if x == 0.0 { 0.0 } else { x })
        .collect()
}

const POWER_ITERATIONS: usize = 200;
const SPECTRAL_SLACK: f64 = 1.005;

/// Upper estimate of `||A||_2` for symmetric `A`.
///
/// Runs 200 power iterations on `A'A` from the normalized all-ones vector
/// (restarting from a fixed non-symmetric vector if that start lies in the
/// null space), inflates the estimate by 0.5%, and caps it by the max
/// absolute row sum, which is a guaranteed upper bound.
pub fn spectral_bound(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    if n == 0 || a.iter().all(|&v| v == 0.0) {
        return 0.0;
    }
    let row_sum_bound = (0..n)
        .map(|i| a.row(i).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let ata = a.tr_mul(a);

    let starts = [
        DVector::from_element(n, 1.0),
        DVector::from_fn(n, |i, _| {
            1.0 + (i as f64 + 1.0).sqrt() * if i % 2 == 0 { 1.0 } else { -1.5 }
        }),
    ];
    let mut estimate = 0.0;
    for start in starts {
        let mut v = start.normalize();
        let mut lambda = 0.0;
        for _ in 0..POWER_ITERATIONS {
            let w = &ata * &v;
            let norm = w.norm();
            if norm == 0.0 {
                lambda = 0.0;
                break;
            }
            lambda = norm;
            v = w / norm;
        }
        estimate = f64::max(estimate, lambda.sqrt());
        if estimate > 0.0 {
            break;
        }
    }
    if estimate == 0.0 {
        return row_sum_bound;
    }
    (estimate * SPECTRAL_SLACK).min(row_sum_bound)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum SolveMode {
    /// Minimize over `||theta||_1 <= radius`.
    Constrained { radius: f64 },
    /// Minimize the l1-penalized objective. `lambda: None` selects
    /// `c_pen * sqrt(ln d / m)`; `radius_guard` additionally projects each
    /// iterate onto the l1 ball.
    Lagrangian {
        lambda: Option<f64>,
        radius_guard: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepRule {
    /// `1 / max(spectral_bound(Gamma), 1e-12)`.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub mode: SolveMode,
    pub max_iter: usize,
    pub tol: f64,
    pub step: StepRule,
    /// Multiplier for the default Lagrangian penalty.
    pub c_pen: f64,
}

impl SolverConfig {
    pub fn constrained(radius: f64) -> Self {
        Self {
            mode: SolveMode::Constrained { radius },
            max_iter: 10_000,
            tol: 1e-9,
            step: StepRule::Auto,
            c_pen: 1.0,
        }
    }

    pub fn lagrangian(lambda: Option<f64>, radius_guard: Option<f64>) -> Self {
        Self {
            mode: SolveMode::Lagrangian { lambda, radius_guard },
            ..Self::constrained(1.0)
        }
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_step(mut self, step: StepRule) -> Self {
        self.step = step;
        self
    }

    fn check(&self) -> Result<()> {
        match self.mode {
            SolveMode::Constrained { radius } => {
                if !(radius > 0.0 && radius.is_finite()) {
                    return Err(invalid("radius", format!("must be positive, got {radius}")));
                }
            }
            SolveMode::Lagrangian { lambda, radius_guard } => {
                if let Some(l) = lambda {
                    if !(l >= 0.0 && l.is_finite()) {
                        return Err(invalid("lambda", format!("must be non-negative, got {l}")));
                    }
                }
                if let Some(r) = radius_guard {
                    if !(r > 0.0 && r.is_finite()) {
                        return Err(invalid("radius", format!("guard must be positive, got {r}")));
                    }
                }
            }
        }
        if self.max_iter == 0 {
            return Err(invalid("max_iter", "must be at least 1"));
        }
        if !(self.tol > 0.0) {
            return Err(invalid("tol", "must be positive"));
        }
        if let StepRule::Fixed(eta) = self.step {
            if !(eta > 0.0 && eta.is_finite()) {
                return Err(invalid("step", "fixed step must be positive"));
            }
        }
        Ok(())
    }

    /// Penalty actually applied for the given moments.
    pub fn resolved_lambda(&self, moments: &CorrectedMoments) -> f64 {
        match self.mode {
            SolveMode::Constrained { .. } => 0.0,
            SolveMode::Lagrangian { lambda: Some(l), .. } => l,
            SolveMode::Lagrangian { lambda: None, .. } => {
                let d = moments.dim() as f64;
                let m = moments.m().max(1) as f64;
                self.c_pen * (d.ln() / m).sqrt()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub theta_hat: CoefficientVector,
    pub iterations: usize,
    pub final_objective: f64,
    pub converged: bool,
    pub step_size_used: f64,
    pub lambda_used: f64,
}

/// `1/2 t'Gamma t - <gamma, t> + lambda ||t||_1`.
pub fn objective(moments: &CorrectedMoments, theta: &CoefficientVector, lambda_n: f64) -> Result<f64> {
    if theta.dim() != moments.dim() {
        return Err(Error::DimensionMismatch {
            expected: moments.dim(),
            found: theta.dim(),
        });
    }
    let t = theta.to_dvector();
    Ok(objective_at(moments, &t, lambda_n))
}

fn objective_at(moments: &CorrectedMoments, t: &DVector<f64>, lambda_n: f64) -> f64 {
    let quad = t.dot(&(moments.gamma_matrix() * t));
    0.5 * quad - moments.gamma_vector().dot(t) + lambda_n * t.lp_norm(1)
}

const TIE_BREAK_OFFSET: f64 = 1e-8;
const ABS_TOL_FLOOR: f64 = 1e-14;

fn converged_step(prev: f64, next: f64, tol: f64, dtheta: f64, theta_scale: f64) -> bool {
    let obj_ok = (next - prev).abs() <= tol * next.abs().max(ABS_TOL_FLOOR);
    let iterate_ok = dtheta <= tol * theta_scale.max(1.0);
    obj_ok && iterate_ok
}

/// Projected (constrained) or proximal (Lagrangian) gradient descent from
/// `theta_0 = 0`.
///
/// Stops once both the relative objective change and the relative iterate
/// change drop below `config.tol`, or after `max_iter` iterations.
///
/// When `gamma = 0` the origin is a stationary point even if `Gamma` has
/// negative curvature; in that case the start is nudged by `1e-8` along the
/// coordinate with the most negative diagonal entry, so the iteration moves
/// to the positive boundary.
pub fn solve(moments: &CorrectedMoments, config: &SolverConfig) -> Result<SolveResult> {
    config.check()?;
    let d = moments.dim();
    let gamma = moments.gamma_matrix();
    let g = moments.gamma_vector();

    let eta = match config.step {
        StepRule::Auto => 1.0 / spectral_bound(gamma).max(1e-12),
        StepRule::Fixed(eta) => eta,
    };
    let lambda = config.resolved_lambda(moments);

    let mut theta = DVector::zeros(d);
    if g.iter().all(|&v| v == 0.0) {
        let (k, min_diag) =
            (0..d)
                .map(|i| (i, gamma[(i, i)]))
                .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
        if min_diag < 0.0 {
            theta[k] = TIE_BREAK_OFFSET;
        }
    }

    let step = |theta: &DVector<f64>| -> DVector<f64> {
        let grad = gamma * theta - g;
        let moved = theta - grad * eta;
        let next: Vec<f64> = match config.mode {
            SolveMode::Constrained { radius } => project_l1(moved.as_slice(), radius),
            SolveMode::Lagrangian { radius_guard, .. } => {
                let shrunk = soft_threshold(moved.as_slice(), eta * lambda);
                match radius_guard {
                    Some(r) => project_l1(&shrunk, r),
                    None => shrunk,
                }
            }
        };
        DVector::from_vec(next)
    };

    let mut obj = objective_at(moments, &theta, lambda);
    let mut converged = false;
    let mut iterations = 0;
    for k in 1..=config.max_iter {
        iterations = k;
        let next = step(&theta);
        let next_obj = objective_at(moments, &next, lambda);
        if !next_obj.is_finite() || next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged {
                iterations: k,
                last_finite: theta.iter().copied().collect(),
            });
        }
        let dtheta = (&next - &theta).amax();
        let done = converged_step(obj, next_obj, config.tol, dtheta, next.amax());
        theta = next;
        obj = next_obj;
        if done {
            converged = true;
            break;
        }
    }

    Ok(SolveResult {
        theta_hat: CoefficientVector::from_vec_unchecked(theta.iter().copied().collect()),
        iterations,
        final_objective: obj,
        converged,
        step_size_used: eta,
        lambda_used: lambda,
    })
}

/// Objective trace of the constrained iteration, for diagnostics and tests.
pub fn objective_trace(moments: &CorrectedMoments, radius: f64, iterations: usize) -> Vec<f64> {
    let gamma = moments.gamma_matrix();
    let g = moments.gamma_vector();
    let eta = 1.0 / spectral_bound(gamma).max(1e-12);
    let mut theta = DVector::zeros(moments.dim());
    let mut trace = vec![objective_at(moments, &theta, 0.0)];
    for _ in 0..iterations {
        let moved = &theta - (gamma * &theta - g) * eta;
        theta = DVector::from_vec(project_l1(moved.as_slice(), radius));
        trace.push(objective_at(moments, &theta, 0.0));
    }
    trace
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::{NoiseSpec, Provenance};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn moments(gamma: &[f64], g: &[f64]) -> CorrectedMoments {
        let d = g.len();
        CorrectedMoments::new(DMatrix::from_row_slice(d, d, gamma), DVector::from_column_slice(g), 1).unwrap()
    }

    #[test]
    fn moments_example() {
        let z = DMatrix::from_row_slice(2, 1, &[1.0, 3.0]);
        let prov = Provenance {
            noise: NoiseSpec::laplace(1.0),
            privacy: None,
            rng: None,
        };
        let pds = PrivateDataset::from_parts(z, vec![2.0, 6.0], 2.0, prov).unwrap();
        let mo = corrected_moments(&pds).unwrap();
        assert_eq!(mo.gamma_matrix()[(0, 0)], 3.0);
        assert_eq!(mo.gamma_vector()[0], 10.0);
        assert_eq!(mo.m(), 2);
    }

    #[test]
    fn moments_are_symmetric() {
        let mo = moments(&[1.0, 2.0, 0.0, 1.0], &[0.0, 0.0]);
        assert_eq!(mo.gamma_matrix()[(0, 1)], 1.0);
        assert_eq!(mo.gamma_matrix()[(1, 0)], 1.0);
    }

    #[test]
    fn projection_examples() {
        assert_eq!(project_l1(&[0.3, -0.2], 1.0), vec![0.3, -0.2]);
        assert_eq!(project_l1(&[3.0, 0.0], 1.0), vec![1.0, 0.0]);
        assert_eq!(project_l1(&[2.0, 1.0], 2.0), vec![1.5, 0.5]);
    }

    #[test]
    fn soft_threshold_examples() {
        assert_eq!(soft_threshold(&[1.0, -1.0], 0.0), vec![1.0, -1.0]);
        assert_eq!(soft_threshold(&[1.0, -1.0], 2.0), vec![0.0, 0.0]);
        assert_eq!(soft_threshold(&[3.0, -0.5], 1.0), vec![2.0, 0.0]);
    }

    #[test]
    fn spectral_examples() {
        let b = spectral_bound(&DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0])));
        assert!((3.0..=3.03).contains(&b), "{b}");
        assert_eq!(spectral_bound(&DMatrix::zeros(3, 3)), 0.0);
        let b = spectral_bound(&DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 2.0, 0.0]));
        assert!((2.0..=2.02).contains(&b), "{b}");
    }

    #[test]
    fn spectral_bound_when_ones_is_in_null_space() {
        // [[1,-1],[-1,1]] annihilates the all-ones start; eigenvalues are 0 and 2.
        let b = spectral_bound(&DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]));
        assert!((2.0..=2.02).contains(&b), "{b}");
    }

    #[test]
    fn objective_examples() {
        let mo = moments(&[2.0], &[4.0]);
        let zero = CoefficientVector::zeros(1);
        assert_eq!(objective(&mo, &zero, 3.0).unwrap(), 0.0);
        let one = CoefficientVector::new(vec![1.0]).unwrap();
        assert_eq!(objective(&mo, &one, 0.0).unwrap(), -3.0);
        assert_eq!(objective(&mo, &one, 1.0).unwrap(), -2.0);
    }

    #[test]
    fn interior_and_boundary_minimizers() {
        let mo = moments(&[2.0], &[4.0]);
        let r = solve(&mo, &SolverConfig::constrained(10.0)).unwrap();
        assert_relative_eq!(r.theta_hat.as_slice()[0], 2.0, epsilon = 1e-9);
        assert_relative_eq!(r.final_objective, -4.0, epsilon = 1e-9);
        assert!(r.converged);

        // Grid search over [-1, 1] at resolution 1e-6 gives theta = 1, objective -3.
        let r = solve(&mo, &SolverConfig::constrained(1.0)).unwrap();
        assert_relative_eq!(r.theta_hat.as_slice()[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(r.final_objective, -3.0, epsilon = 1e-12);
    }

    #[test]
    fn negative_curvature_tie_break() {
        let mo = moments(&[-1.0], &[0.0]);
        let r = solve(&mo, &SolverConfig::constrained(1.0)).unwrap();
        assert_eq!(r.theta_hat.as_slice(), &[1.0]);
        assert_relative_eq!(r.final_objective, -0.5, epsilon = 1e-12);
    }

    #[test]
    fn unguarded_lagrangian_diverges_on_indefinite() {
        let mo = moments(&[-1.0, 0.0, 0.0, 1.0], &[0.5, 0.5]);
        let err = solve(&mo, &SolverConfig::lagrangian(Some(0.0), None)).unwrap_err();
        match err {
            Error::Diverged { last_finite, .. } => assert!(last_finite.iter().all(|v| v.is_finite())),
            other => panic!("expected divergence, got {other:?}"),
        }
        let guarded = solve(&mo, &SolverConfig::lagrangian(Some(0.0), Some(2.0))).unwrap();
        assert!(guarded.theta_hat.l1_norm() <= 2.0 * (1.0 + 1e-10));
    }

    #[test]
    fn lagrangian_shrinks_to_soft_threshold_solution() {
        // Gamma = I: minimizer is soft_threshold(gamma, lambda).
        let mo = moments(&[1.0, 0.0, 0.0, 1.0], &[2.0, -0.3]);
        let r = solve(&mo, &SolverConfig::lagrangian(Some(0.5), None)).unwrap();
        assert_relative_eq!(r.theta_hat.as_slice()[0], 1.5, epsilon = 1e-9);
        assert_eq!(r.theta_hat.as_slice()[1], 0.0);
        assert_eq!(r.lambda_used, 0.5);
    }

    #[test]
    fn default_lambda_rule() {
        let gamma = DMatrix::identity(4, 4);
        let mo = CorrectedMoments::new(gamma, DVector::from_element(4, 1.0), 100).unwrap();
        let cfg = SolverConfig::lagrangian(None, None);
        assert_relative_eq!(
            cfg.resolved_lambda(&mo),
            (4f64.ln() / 100.0).sqrt(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn invalid_configs_rejected() {
        let mo = moments(&[1.0], &[1.0]);
        assert!(solve(&mo, &SolverConfig::constrained(0.0)).is_err());
        assert!(solve(&mo, &SolverConfig::lagrangian(Some(-1.0), None)).is_err());
        assert!(solve(&mo, &SolverConfig::constrained(1.0).with_max_iter(0)).is_err());
    }

    #[test]
    fn max_iter_reports_not_converged() {
        let mo = moments(&[1.0, 0.9, 0.9, 1.0], &[1.0, -1.0]);
        let r = solve(&mo, &SolverConfig::constrained(100.0).with_max_iter(2)).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 2);
    }

    fn bisection_oracle(v: &[f64], radius: f64) -> Vec<f64> {
        if v.iter().map(|x| x.abs()).sum::<f64>() <= radius {
            return v.to_vec();
        }
        let (mut lo, mut hi) = (0.0, v.iter().fold(0.0f64, |a, x| a.max(x.abs())));
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let s: f64 = v.iter().map(|x| (x.abs() - mid).max(0.0)).sum();
            if s > radius {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let level = 0.5 * (lo + hi);
        v.iter().map(|x| x.signum() * (x.abs() - level).max(0.0)).collect()
    }

    proptest! {
        #[test]
        fn projection_feasible_and_matches_oracle(v in proptest::collection::vec(-50.0..50.0f64, 1..200),
                                                  radius in 0.01..100.0f64) {
            let p = project_l1(&v, radius);
            let l1: f64 = p.iter().map(|x| x.abs()).sum();
            prop_assert!(l1 <= radius + 1e-12 * radius.max(1.0));
            let o = bisection_oracle(&v, radius);
            for (a, b) in p.iter().zip(&o) {
                prop_assert!((a - b).abs() <= 1e-10);
            }
        }

        #[test]
        fn projection_identity_when_feasible(v in proptest::collection::vec(-1.0..1.0f64, 1..20)) {
            let radius = v.iter().map(|x| x.abs()).sum::<f64>() + 0.1;
            prop_assert_eq!(project_l1(&v, radius), v);
        }

        #[test]
        fn gradient_matches_finite_differences(
            entries in proptest::collection::vec(-3.0..3.0f64, 9),
            g in proptest::collection::vec(-3.0..3.0f64, 3),
            t in proptest::collection::vec(0.1..2.0f64, 3),
            signs in proptest::collection::vec(proptest::bool::ANY, 3),
        ) {
            let mo = moments(&entries, &g);
            let t: Vec<f64> = t.iter().zip(&signs).map(|(x, s)| if *s { *x } else { -*x }).collect();
            let analytic = mo.gamma_matrix() * DVector::from_column_slice(&t) - mo.gamma_vector();
            let h = 1e-6;
            for i in 0..3 {
                let mut plus = t.clone();
                let mut minus = t.clone();
                plus[i] += h;
                minus[i] -= h;
                let fp = objective(&mo, &CoefficientVector::new(plus).unwrap(), 0.0).unwrap();
                let fm = objective(&mo, &CoefficientVector::new(minus).unwrap(), 0.0).unwrap();
                let fd = (fp - fm) / (2.0 * h);
                prop_assert!((fd - analytic[i]).abs() <= 1e-4 * analytic[i].abs().max(1.0));
            }
        }

        #[test]
        fn constrained_objective_monotone(
            entries in proptest::collection::vec(-3.0..3.0f64, 16),
            g in proptest::collection::vec(-3.0..3.0f64, 4),
            radius in 0.1..5.0f64,
        ) {
            let mo = moments(&entries, &g);
            let trace = objective_trace(&mo, radius, 300);
            for w in trace.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0));
            }
        }
    }
}
