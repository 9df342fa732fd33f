use rayon::prelude::*;
use survcred::datagen::{
    coupled_noise_pair, gen_synthetic1, gen_synthetic2, load_csv, save_csv, sparse_coefficients, CovariateNoise,
    Synthetic1, Synthetic2,
};
use survcred::solver::{solve, CorrectedMoments, SolverConfig};
use survcred::tester::ValidationSource;
use survcred::{model_distance, Dataset, ModelBounds, RngSpec};

#[test]
fn sparse_support_has_sqrt_d_nonzeros_on_average() {
    let total: usize = (0..1000u64)
        .map(|s| {
            sparse_coefficients(&mut RngSpec::new(s).rng(), 100, false)
                .iter()
                .filter(|v| **v != 0.0)
                .count()
        })
        .sum();
    let mean = total as f64 / 1000.0;
    assert!((9.0..=11.0).contains(&mean), "{mean}");
}

fn noise_variance(kind: CovariateNoise) -> f64 {
    let out = gen_synthetic2(&Synthetic2::new(10, 100_000, kind), &RngSpec::new(77)).unwrap();
    let x = out.clean.covariates_flat();
    let z = out.noisy.z();
    let (m, d) = (out.clean.size(), out.clean.dim());
    let w: Vec<f64> = (0..m)
        .flat_map(|i| (0..d).map(move |j| (i, j)))
        .map(|(i, j)| z[(i, j)] - x[i * d + j])
        .collect();
    let mean = w.iter().sum::<f64>() / w.len() as f64;
    w.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (w.len() - 1) as f64
}

#[test]
fn both_noise_kinds_match_in_variance() {
    let g = noise_variance(CovariateNoise::Gaussian);
    let l = noise_variance(CovariateNoise::Laplace);
    assert!((g / l - 1.0).abs() < 0.02, "{g} vs {l}");
}

#[test]
fn coupled_noise_keeps_each_marginal() {
    let out = gen_synthetic2(
        &Synthetic2::new(10, 100_000, CovariateNoise::Gaussian),
        &RngSpec::new(78),
    )
    .unwrap();
    let (g, l) = coupled_noise_pair(&out.clean, &RngSpec::new(79)).unwrap();
    let x = out.clean.covariates_flat();
    let d = out.clean.dim();
    let moments = |z: &nalgebra::DMatrix<f64>| {
        let w: Vec<f64> = (0..x.len()).map(|k| z[(k / d, k % d)] - x[k]).collect();
        let n = w.len() as f64;
        let var = w.iter().map(|v| v * v).sum::<f64>() / n;
        let kurt = w.iter().map(|v| v.powi(4)).sum::<f64>() / n / (var * var);
        (var, kurt)
    };
    let (vg, kg) = moments(g.z());
    let (vl, kl) = moments(l.z());
    assert!((vg - 1.0).abs() < 0.01 && (vl - 1.0).abs() < 0.01, "{vg} {vl}");
    // Kurtosis 3 for the normal, 6 for the Laplace.
    assert!((kg - 3.0).abs() < 0.1 && (kl - 6.0).abs() < 0.3, "{kg} {kl}");
    assert_eq!((g.sigma_w(), l.sigma_w()), (1.0, 1.0));
}

#[test]
fn four_sigma_clipping_rate() {
    let clamped: usize = (0..20u64)
        .into_par_iter()
        .map(|s| {
            let out = gen_synthetic1(&Synthetic1::new(10, 10_000, 0.0), &RngSpec::new(s)).unwrap();
            out.clip.covariate_clamps.iter().sum::<usize>()
        })
        .sum();
    // 2 * P(Z > 4) = 6.334e-5 per cell over 2e6 cells: 126.7 expected, sd 11.3.
    let frac = clamped as f64 / 2e6;
    assert!((4.5e-5..=8.2e-5).contains(&frac), "{frac}");
}

#[test]
fn close_models_fit_close_on_large_samples() {
    let under: usize = (0..100u64)
        .into_par_iter()
        .map(|s| {
            let rng = RngSpec::new(500 + s);
            let out = gen_synthetic1(&Synthetic1::new(10, 20_000, 0.0), &rng.child(0)).unwrap();
            let pop = out.star_sampler.draw(20_000, &rng.child(1)).unwrap();
            let pop = Dataset::new(10, pop, ModelBounds::new(1e3, 1e3, 1e3).unwrap()).unwrap();
            let cfg = SolverConfig::constrained(1e3);
            let a = solve(&CorrectedMoments::from_dataset(&out.survey).unwrap(), &cfg)
                .unwrap()
                .theta_hat;
            let b = solve(&CorrectedMoments::from_dataset(&pop).unwrap(), &cfg)
                .unwrap()
                .theta_hat;
            let xs: Vec<&[f64]> = pop.rows().collect();
            let dist = model_distance(&a, &b, &xs).unwrap();
            // With coefficient variance 0.01 the squared gap is 0.02 chi^2_10,
            // whose 95% quantile is 0.366 (distance 0.605).
            usize::from(dist < 0.65)
        })
        .sum();
    assert!(under >= 95, "{under} of 100");
}

#[test]
fn large_csv_round_trip_is_bitwise() {
    let out = gen_synthetic1(&Synthetic1::new(5, 10_000, 1.0), &RngSpec::new(12)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.csv");
    save_csv(&out.survey, &p).unwrap();
    let back = load_csv(&p, *out.survey.bounds()).unwrap();
    let same = back
        .covariates_flat()
        .iter()
        .chain(back.responses())
        .zip(out.survey.covariates_flat().iter().chain(out.survey.responses()))
        .all(|(a, b)| a.to_bits() == b.to_bits());
    assert!(same);
    assert_eq!(back.size(), 10_000);
}
