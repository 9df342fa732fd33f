use rayon::prelude::*;
use survcred::datagen::{gen_synthetic1, Synthetic1};
use survcred::tester::{priverify, surverify, Decision, LambdaMin, TestConfig, Verdict};
use survcred::{Accounting, PrivacyParams, RngSpec};

fn run_public(mu: f64, m: usize, trials: u64, seed: u64) -> Vec<(Verdict, f64)> {
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let rng = RngSpec::new(seed).child(i);
            let data = gen_synthetic1(&Synthetic1::new(10, m, mu), &rng.child(0)).unwrap();
            let cfg = TestConfig::new(0.0, 0.2, 0.1, *data.survey.bounds()).unwrap();
            let v = surverify(&data.survey, &data.star_sampler, &cfg, &rng.child(1)).unwrap();
            (v, cfg.bounds.tau)
        })
        .collect()
}

fn run_private(mu: f64, m: usize, trials: u64, seed: u64) -> Vec<Verdict> {
    let privacy = PrivacyParams::new(2.0, 0.0, Accounting::PerCoordinate).unwrap();
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let rng = RngSpec::new(seed).child(i);
            let data = gen_synthetic1(&Synthetic1::new(10, m, mu), &rng.child(0)).unwrap();
            let cfg = TestConfig::new(0.0, 0.2, 0.1, *data.survey.bounds()).unwrap();
            priverify(
                &data.survey,
                &data.star_sampler,
                &cfg,
                &privacy,
                LambdaMin::Declared { value: 1.0 },
                &rng.child(1),
            )
            .unwrap()
        })
        .collect()
}

fn rate(vs: &[Verdict], d: Decision) -> f64 {
    vs.iter().filter(|v| v.decision == d).count() as f64 / vs.len() as f64
}

#[test]
fn public_test_accepts_identical_models() {
    let runs = run_public(0.0, 10_000, 100, 1);
    for (v, tau) in &runs {
        assert!(v.gamma_s >= v.l_hat);
        assert_eq!(v.t_used, survcred::validation_sample_size(*tau, 0.1, 0.2).unwrap());
    }
    let vs: Vec<Verdict> = runs.into_iter().map(|(v, _)| v).collect();
    let acc = rate(&vs, Decision::Accept);
    assert!(acc >= 0.85, "accept rate {acc}");
}

#[test]
fn public_test_rejects_far_models() {
    let vs: Vec<Verdict> = run_public(2.0, 10_000, 100, 2).into_iter().map(|(v, _)| v).collect();
    let rej = rate(&vs, Decision::Reject);
    assert!(rej >= 0.9, "reject rate {rej}");
}

#[test]
fn private_test_accepts_identical_models() {
    let vs = run_private(0.0, 100_000, 50, 3);
    let acc = rate(&vs, Decision::Accept);
    assert!(acc >= 0.8, "accept rate {acc}");
    assert!(vs.iter().all(|v| v.j_hat > 0.0 && !v.lambda_min.unwrap().heuristic));
}

#[test]
fn private_test_rejects_shifted_population() {
    let vs = run_private(3.0, 100_000, 50, 4);
    let rej = rate(&vs, Decision::Reject);
    assert!(rej > 0.5, "reject rate {rej}");
}
