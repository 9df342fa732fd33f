use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::{json, Value};
use survcred::bounds::{
    error_bound_gaussian_sigma, error_bound_laplace, error_bound_subexponential, lower_re_params,
    matrix_deviation_bound, matrix_deviation_level, min_samples_gaussian, min_samples_laplace, one_sided_bernstein,
    squared_subexp_tail, squared_subexp_three_term, subweibull_right_tail, suggest_lambda, SpectrumInfo, TailParams,
};
use survcred::datagen::{
    generate, load_csv, load_noisy_csv, load_private, load_sidecar, save_csv, save_private, sidecar_path,
    CovariateNoise, GeneratorKind, GeneratorSpec, LinearModelSource,
};
use survcred::tester::{
    privacy_penalty_gaussian, privacy_penalty_laplace, priverify_published, survey_loss_bound, BoundConstants,
    DatasetSource,
};
use survcred::{
    corrected_moments, make_noise_spec, privatize, priverify, solve, surverify, validate_dataset,
    validation_sample_size, Accounting, Dataset, Decision, GaussianVarianceFormula, LambdaMin, LossBoundForm,
    ModelBounds, PrivacyParams, RngSpec, SolverConfig, StepRule, TestConfig, ValidationSource,
};

use crate::args::*;
use crate::output::{emit, summary, with_manifest, write_json_file, Manifest};
use crate::sweep::{run_sweep, write_trials, SweepSpec};
use crate::UsageError;

/// Process exit status of a command that ran to completion.
pub type Status = i32;

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn need<T: Copy>(v: Option<T>, flag: &str) -> Result<T> {
    v.ok_or_else(|| usage(format!("--{flag} is required for this bound")))
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn accounting(a: AccountingArg) -> Accounting {
    match a {
        AccountingArg::PerCoord => Accounting::PerCoordinate,
        AccountingArg::WholeRecord => Accounting::WholeRecord,
    }
}

fn loss_form(f: LossFormArg) -> LossBoundForm {
    match f {
        LossFormArg::LogD => LossBoundForm::LogD,
        LossFormArg::SqrtDPlus1 => LossBoundForm::SqrtDPlus1,
    }
}

/// Loads a CSV and checks it against the bounds; out-of-range cells are a
/// data error, not something to clip silently.
fn load_validated(path: &Path, bounds: ModelBounds) -> Result<Dataset> {
    let mut ds = load_csv(path, bounds).with_context(|| format!("reading {}", path.display()))?;
    let report = validate_dataset(&mut ds)?;
    if !report.is_clean() {
        bail!(
            "{} has {} covariate and {} response values outside the declared bounds",
            path.display(),
            report.covariate_violations(),
            report.response_violations()
        );
    }
    Ok(ds)
}

pub fn run(cli: &Cli) -> Result<Status> {
    let manifest = Manifest::new(cli);
    match &cli.command {
        Command::Gen(a) => gen(cli, &manifest, a),
        Command::Publish(a) => publish(cli, &manifest, a),
        Command::Fit(a) => fit(cli, &manifest, a),
        Command::Verify(a) => verify(cli, &manifest, a),
        Command::Bounds(a) => bounds(cli, &manifest, a),
        Command::Sweep(a) => sweep(cli, &manifest, a),
    }
}

fn gen(cli: &Cli, manifest: &Manifest, a: &GenArgs) -> Result<Status> {
    let kind = match a.kind {
        GenKind::Synthetic1 => GeneratorKind::Synthetic1 { mu: a.mu },
        GenKind::Synthetic2 => GeneratorKind::Synthetic2 {
            noise: match a.noise {
                NoiseArg::Gaussian => CovariateNoise::Gaussian,
                NoiseArg::Laplace => CovariateNoise::Laplace,
            },
        },
    };
    let root = RngSpec::new(cli.seed);
    let out = generate(&GeneratorSpec {
        kind,
        d: a.d,
        m: a.m,
        rng: root,
    })?;

    let mut files = Vec::new();
    let survey_path = with_suffix(&a.out, ".survey.csv");
    save_csv(&out.survey, &survey_path)?;
    files.push(survey_path);

    let truth_path = with_suffix(&a.out, ".truth.json");
    write_json_file(&truth_path, &with_manifest(manifest, &out.truth)?)?;
    files.push(truth_path);

    if let Some(pop) = &out.population {
        let p = with_suffix(&a.out, ".validation.json");
        write_json_file(&p, &serde_json::to_value(pop)?)?;
        files.push(p);
        if let Some(n) = a.validation_rows {
            let rows = pop.sample_rows(n, &root.child(3));
            let ds = Dataset::new(a.d, rows, *out.survey.bounds())?;
            let p = with_suffix(&a.out, ".validation.csv");
            save_csv(&ds, &p)?;
            files.push(p);
        }
    } else if a.validation_rows.is_some() {
        log::warn!("--validation-rows ignored: this generator has no population sampler");
    }
    if let Some(noisy) = &out.noisy {
        let p = with_suffix(&a.out, ".private.csv");
        save_private(noisy, &p, Some(manifest.to_value()))?;
        files.push(sidecar_path(&p));
        files.push(p);
    }
    files.sort();

    emit(
        cli,
        &with_manifest(
            manifest,
            json!({
                "files": files,
                "rows": out.survey.size(),
                "d": out.survey.dim(),
                "bounds": out.survey.bounds(),
                "clipped_cells": out.truth.clip.total(),
            }),
        )?,
    )?;
    Ok(0)
}

fn publish(cli: &Cli, manifest: &Manifest, a: &PublishArgs) -> Result<Status> {
    let Some(output) = &cli.output else {
        return Err(usage("publish needs --output for the noisy CSV"));
    };
    let bounds = ModelBounds::new(a.zeta, a.tau.unwrap_or(f64::INFINITY), 1.0)?;
    let ds = load_validated(&a.input, bounds)?;
    let formula = match a.gaussian_formula {
        GaussianFormulaArg::Standard => GaussianVarianceFormula::Standard,
        GaussianFormulaArg::SqrtLog => GaussianVarianceFormula::SqrtLogLiteral { c: a.gaussian_c },
        GaussianFormulaArg::Prose => GaussianVarianceFormula::ProseLiteral,
    };
    let privacy = PrivacyParams::new(a.alpha, a.beta, accounting(a.accounting))?.with_gaussian_formula(formula);
    let noise = make_noise_spec(&privacy, a.zeta, ds.dim())?;
    for w in &noise.warnings {
        log::warn!("{w}");
    }
    let pds = privatize(&ds, &noise, Some(&privacy), &RngSpec::new(cli.seed))?;
    let sidecar = save_private(&pds, output, Some(manifest.to_value()))?;
    summary(
        cli,
        &json!({
            "output": output,
            "sidecar": sidecar_path(output),
            "rows": sidecar.rows,
            "dim": sidecar.dim,
            "sigma_w": sidecar.sigma_w,
            "noise": sidecar.provenance.noise,
        }),
    )?;
    Ok(0)
}

#[derive(Serialize)]
struct FitOutput {
    theta_hat: Vec<f64>,
    iterations: usize,
    objective: f64,
    converged: bool,
    step_size: f64,
    lambda: f64,
    sigma_w: f64,
    m: usize,
    d: usize,
}

fn fit(cli: &Cli, manifest: &Manifest, a: &FitArgs) -> Result<Status> {
    let has_sidecar = sidecar_path(&a.input).exists();
    let pds = match a.sigma_w.as_deref() {
        Some("from-sidecar") => load_private(&a.input),
        Some(v) => {
            let s: f64 = v
                .parse()
                .map_err(|_| usage(format!("--sigma-w expects a number or `from-sidecar`, got `{v}`")))?;
            load_noisy_csv(&a.input, s)
        }
        None if has_sidecar => load_private(&a.input),
        None => load_noisy_csv(&a.input, 0.0),
    }
    .with_context(|| format!("reading {}", a.input.display()))?;
    let mut config = match a.mode {
        ModeArg::Constrained => {
            let r = a
                .radius
                .ok_or_else(|| usage("--radius is required in constrained mode"))?;
            SolverConfig::constrained(r)
        }
        ModeArg::Lagrangian => SolverConfig::lagrangian(a.lambda, a.radius),
    }
    .with_max_iter(a.max_iter)
    .with_tol(a.tol);
    if let Some(eta) = a.step {
        config = config.with_step(StepRule::Fixed(eta));
    }
    config.c_pen = a.c_pen;

    let moments = corrected_moments(&pds)?;
    let res = solve(&moments, &config)?;
    if !res.converged {
        log::warn!("solver stopped after {} iterations without converging", res.iterations);
    }
    emit(
        cli,
        &with_manifest(
            manifest,
            FitOutput {
                theta_hat: res.theta_hat.into_vec(),
                iterations: res.iterations,
                objective: res.final_objective,
                converged: res.converged,
                step_size: res.step_size_used,
                lambda: res.lambda_used,
                sigma_w: pds.sigma_w(),
                m: pds.m(),
                d: pds.dim(),
            },
        )?,
    )?;
    Ok(0)
}

fn validation_source(path: &Path, bounds: ModelBounds) -> Result<Box<dyn ValidationSource>> {
    if path.extension().is_some_and(|e| e == "json") {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let src: LinearModelSource = serde_json::from_str(&text).context("parsing population sampler")?;
        src.check()?;
        Ok(Box::new(src))
    } else {
        let ds = load_csv(path, bounds).with_context(|| format!("reading {}", path.display()))?;
        Ok(Box::new(DatasetSource::new(ds)))
    }
}

fn verify(cli: &Cli, manifest: &Manifest, a: &VerifyArgs) -> Result<Status> {
    let bounds = ModelBounds::new(a.zeta, a.tau, a.radius)?;
    let cfg = TestConfig::new(a.kappa, a.tol, a.delta, bounds)?
        .with_form(loss_form(a.loss_bound_form))
        .with_constants(BoundConstants {
            c2: a.c2,
            c_eps: a.c_eps,
        });
    let source = validation_source(&a.validation, bounds)?;
    let lambda_min = match a.lambda_min {
        Some(value) => LambdaMin::Declared { value },
        None => LambdaMin::Estimate {
            floor: a.lambda_min_floor,
        },
    };
    let rng = RngSpec::new(cli.seed);

    let verdict = if sidecar_path(&a.survey).exists() {
        // Already published: test the noisy data as is.
        let sidecar = load_sidecar(&a.survey).with_context(|| format!("reading sidecar of {}", a.survey.display()))?;
        let privacy = match (a.alpha, sidecar.provenance.privacy) {
            (Some(alpha), _) => PrivacyParams::new(alpha, a.beta, accounting(a.accounting))?,
            (None, Some(p)) => p,
            (None, None) => return Err(usage("the published survey records no privacy level; pass --alpha")),
        };
        let pds = load_private(&a.survey).with_context(|| format!("reading {}", a.survey.display()))?;
        priverify_published(&pds, source.as_ref(), &cfg, &privacy, lambda_min, &rng)?
    } else {
        let survey = load_validated(&a.survey, bounds)?;
        match a.alpha {
            Some(alpha) => {
                let privacy = PrivacyParams::new(alpha, a.beta, accounting(a.accounting))?;
                priverify(&survey, source.as_ref(), &cfg, &privacy, lambda_min, &rng)?
            }
            None => surverify(&survey, source.as_ref(), &cfg, &rng)?,
        }
    };
    for note in &verdict.notes {
        log::warn!("{note}");
    }
    emit(cli, &with_manifest(manifest, &verdict)?)?;
    Ok(match verdict.decision {
        Decision::Accept => 0,
        Decision::Reject => 3,
    })
}

fn bound_value(a: &BoundsArgs) -> Result<Value> {
    let spectrum = || -> Result<SpectrumInfo> { Ok(SpectrumInfo::new(need(a.lambda_min, "lambda-min")?)?) };
    let tail = || -> Result<TailParams> {
        Ok(TailParams::new(
            need(a.c_x, "c-x")?,
            need(a.c_w, "c-w")?,
            need(a.c_eps, "c-eps")?,
            need(a.sigma_eps, "sigma-eps")?,
        )?)
    };
    let model_bounds = || -> Result<ModelBounds> {
        Ok(ModelBounds::new(
            need(a.zeta, "zeta")?,
            a.tau.unwrap_or(f64::INFINITY),
            need(a.radius, "radius")?,
        )?)
    };
    let v = match a.bound {
        BoundName::MinSamplesGaussian => json!(min_samples_gaussian(
            &spectrum()?,
            need(a.zeta, "zeta")?,
            need(a.alpha, "alpha")?,
            need(a.beta, "beta")?,
            need(a.d, "d")?,
            a.c
        )?),
        BoundName::MinSamplesLaplace => json!(min_samples_laplace(
            &spectrum()?,
            need(a.zeta, "zeta")?,
            need(a.alpha, "alpha")?,
            need(a.c_eps, "c-eps")?,
            need(a.d, "d")?
        )?),
        BoundName::ErrorBoundGaussian => json!(error_bound_gaussian_sigma(
            need(a.sigma_eps, "sigma-eps")?,
            &spectrum()?,
            need(a.zeta, "zeta")?,
            need(a.alpha, "alpha")?,
            need(a.beta, "beta")?,
            need(a.radius, "radius")?,
            need(a.d, "d")?,
            need(a.m, "m")?,
            a.c2
        )?),
        BoundName::ErrorBoundLaplace => {
            let c_eps = need(a.c_eps, "c-eps")?;
            // Only c_eps enters this bound.
            let params = TailParams::new(c_eps, c_eps, c_eps, c_eps)?;
            json!(error_bound_laplace(
                &params,
                &spectrum()?,
                need(a.zeta, "zeta")?,
                need(a.alpha, "alpha")?,
                need(a.radius, "radius")?,
                need(a.d, "d")?,
                need(a.m, "m")?,
                a.c2
            )?)
        }
        BoundName::ErrorBoundSubexponential => json!(error_bound_subexponential(
            &tail()?,
            &spectrum()?,
            need(a.radius, "radius")?,
            need(a.d, "d")?,
            need(a.m, "m")?,
            a.c1
        )?),
        BoundName::LowerRe => serde_json::to_value(lower_re_params(
            &spectrum()?,
            need(a.c_max, "c-max")?,
            need(a.m, "m")?,
            need(a.d, "d")?,
            a.c1,
        )?)?,
        BoundName::SuggestLambda => json!(suggest_lambda(
            &tail()?,
            need(a.radius, "radius")?,
            need(a.d, "d")?,
            need(a.m, "m")?,
            a.c1
        )?),
        BoundName::SubweibullTail => serde_json::to_value(subweibull_right_tail(
            need(a.n, "n")?,
            need(a.t, "t")?,
            need(a.alpha_shape, "alpha-shape")?,
            need(a.c_alpha, "c-alpha")?,
            need(a.sigma_minus_sq, "sigma-minus-sq")?,
            a.beta_split,
        )?)?,
        BoundName::SquaredSubexpTail => serde_json::to_value(squared_subexp_tail(
            need(a.n, "n")?,
            need(a.t, "t")?,
            need(a.c_x, "c-x")?,
            a.c,
        )?)?,
        BoundName::SquaredSubexpThreeTerm => serde_json::to_value(squared_subexp_three_term(
            need(a.n, "n")?,
            need(a.t, "t")?,
            need(a.c_x, "c-x")?,
            a.c,
        )?)?,
        BoundName::OneSidedBernstein => serde_json::to_value(one_sided_bernstein(
            need(a.n, "n")?,
            need(a.t, "t")?,
            need(a.second_moment, "second-moment")?,
        )?)?,
        BoundName::MatrixDeviation => serde_json::to_value(matrix_deviation_bound(
            need(a.n, "n")?,
            need(a.d1, "d1")?,
            need(a.d2, "d2")?,
            need(a.c_max, "c-max")?,
            need(a.t, "t")?,
            a.c,
        )?)?,
        BoundName::MatrixDeviationLevel => json!(matrix_deviation_level(
            need(a.m, "m")?,
            need(a.d, "d")?,
            need(a.c_max, "c-max")?,
            a.c1
        )?),
        BoundName::ValidationSampleSize => json!(validation_sample_size(
            need(a.tau, "tau")?,
            need(a.delta, "delta")?,
            need(a.tol, "tol")?
        )?),
        BoundName::SurveyLossBound => {
            let m = need(a.m, "m")?;
            if !(m >= 1.0 && m.fract() == 0.0) {
                return Err(usage("--m must be a positive integer for this bound"));
            }
            json!(survey_loss_bound(
                need(a.l_hat, "l-hat")?,
                m as usize,
                need(a.d, "d")?,
                &ModelBounds::new(need(a.zeta, "zeta")?, need(a.tau, "tau")?, need(a.radius, "radius")?)?,
                need(a.delta, "delta")?,
                loss_form(a.loss_bound_form),
            )?)
        }
        BoundName::PenaltyGaussian => json!(privacy_penalty_gaussian(
            &model_bounds()?,
            need(a.alpha, "alpha")?,
            need(a.beta, "beta")?,
            need(a.lambda_min, "lambda-min")?,
            need(a.m, "m")?,
            need(a.d, "d")?,
            a.c2
        )?),
        BoundName::PenaltyLaplace => json!(privacy_penalty_laplace(
            &model_bounds()?,
            need(a.alpha, "alpha")?,
            need(a.c_eps, "c-eps")?,
            need(a.lambda_min, "lambda-min")?,
            need(a.m, "m")?,
            need(a.d, "d")?,
            a.c2
        )?),
    };
    Ok(v)
}

fn bounds(cli: &Cli, manifest: &Manifest, a: &BoundsArgs) -> Result<Status> {
    let value = bound_value(a)?;
    emit(
        cli,
        &with_manifest(manifest, json!({ "bound": a.bound, "value": value }))?,
    )?;
    Ok(0)
}

fn sweep(cli: &Cli, manifest: &Manifest, a: &SweepArgs) -> Result<Status> {
    let spec = SweepSpec::from_args(a, cli.seed);
    spec.check()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.threads)
        .build()
        .context("starting worker pool")?;
    let out = pool.install(|| run_sweep(&spec))?;
    let summary_json = with_manifest(manifest, &out.summary)?;
    match &cli.output {
        Some(dir) => {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            write_trials(dir, &out.records)?;
            write_json_file(&dir.join("summary.json"), &summary_json)?;
            summary(
                cli,
                &json!({ "output": dir, "points": out.summary.points.len(), "trials": out.records.len() }),
            )?;
        }
        None => summary(cli, &summary_json)?,
    }
    Ok(0)
}
