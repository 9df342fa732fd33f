use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn survcred(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_survcred"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn json_file(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Generates a survey with `mu` and returns its tau.
fn gen(dir: &Path, prefix: &str, mu: &str) -> String {
    let out = survcred(
        dir,
        &[
            "--seed",
            "21",
            "gen",
            "--kind",
            "synthetic1",
            "--d",
            "5",
            "--m",
            "4000",
            "--mu",
            mu,
            "--out",
            prefix,
            "--quiet",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    json_file(&dir.join(format!("{prefix}.truth.json")))["bounds"]["tau"].to_string()
}

fn verify(dir: &Path, prefix: &str, tau: &str, extra: &[&str]) -> Output {
    let survey = format!("{prefix}.survey.csv");
    let validation = format!("{prefix}.validation.json");
    let mut args = vec![
        "verify",
        "--survey",
        &survey,
        "--validation",
        &validation,
        "--tau",
        tau,
        "--tol",
        "0.2",
        "--delta",
        "0.1",
        "--radius",
        "1",
        "--zeta",
        "4",
    ];
    args.extend_from_slice(extra);
    survcred(dir, &args)
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(
        code(&survcred(
            d,
            &["fit", "--input", "x.csv", "--radius", "1", "--frobnicate"]
        )),
        1
    );
    assert_eq!(code(&survcred(d, &["--help"])), 0);
    assert_eq!(
        code(&survcred(d, &["fit", "--input", "missing.csv", "--radius", "1"])),
        2
    );

    let tau = gen(d, "near", "0");
    let out = verify(d, "near", &tau, &[]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["decision"], "ACCEPT");

    let tau_far = gen(d, "far", "2");
    let out = verify(d, "far", &tau_far, &["--quiet"]);
    assert_eq!(code(&out), 3);
    assert!(out.stdout.is_empty());

    // Out-of-range parameters are usage errors.
    assert_eq!(code(&verify(d, "near", &tau, &["--kappa=-1"])), 1);
    assert_eq!(
        code(&survcred(
            d,
            &["publish", "--input", "near.survey.csv", "--alpha", "2", "--zeta", "4"]
        )),
        1
    );
    assert_eq!(code(&survcred(d, &["fit", "--input", "near.survey.csv"])), 1);
    assert_eq!(
        code(&survcred(d, &["bounds", "--bound", "min-samples-laplace", "--d", "3"])),
        1
    );

    // Survey values outside the declared bounds are a data error.
    let out = survcred(
        d,
        &[
            "publish",
            "--input",
            "near.survey.csv",
            "--alpha",
            "2",
            "--zeta",
            "0.5",
            "--output",
            "p.csv",
        ],
    );
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("outside the declared bounds"));
}

#[test]
fn publish_then_fit_uses_the_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    gen(d, "s", "0");
    let out = survcred(
        d,
        &[
            "--seed",
            "5",
            "publish",
            "--input",
            "s.survey.csv",
            "--alpha",
            "1",
            "--zeta",
            "4",
            "--output",
            "pub.csv",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let sidecar = json_file(&d.join("pub.csv.json"));
    // Laplace scale 2 zeta / alpha = 8, variance 128.
    assert_eq!(sidecar["sigma_w"], 128.0);
    assert_eq!(sidecar["manifest"]["command"], "publish");
    assert_eq!(sidecar["manifest"]["seed"], 5);

    let out = survcred(
        d,
        &["fit", "--input", "pub.csv", "--radius", "1", "--output", "fit.json"],
    );
    assert_eq!(code(&out), 0);
    let fit = json_file(&d.join("fit.json"));
    assert_eq!(fit["sigma_w"], 128.0);
    assert_eq!(fit["d"], 5);
    assert_eq!(fit["theta_hat"].as_array().unwrap().len(), 5);

    let out = survcred(
        d,
        &[
            "fit",
            "--input",
            "pub.csv",
            "--radius",
            "1",
            "--sigma-w",
            "0",
            "--output",
            "raw.json",
        ],
    );
    assert_eq!(code(&out), 0);
    assert_eq!(json_file(&d.join("raw.json"))["sigma_w"], 0.0);
    assert_eq!(
        code(&survcred(
            d,
            &["fit", "--input", "pub.csv", "--radius", "1", "--sigma-w", "lots"]
        )),
        1
    );
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("cfg.json"),
        r#"{"bound": "validation-sample-size", "tau": 1, "delta": 0.1, "tol": 0.5, "quiet": false}"#,
    )
    .unwrap();
    let out = survcred(d, &["bounds", "--config", "cfg.json"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["value"], 8);

    let out = survcred(d, &["--config", "cfg.json", "bounds", "--tol", "0.1"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["value"], 185);
    assert_eq!(v["manifest"]["config"]["command"]["bounds"]["tol"], 0.1);

    std::fs::write(d.join("bad.json"), "[1, 2]").unwrap();
    assert_eq!(code(&survcred(d, &["bounds", "--config", "bad.json"])), 1);
}

#[test]
fn manifest_and_csv_output() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = survcred(
        d,
        &[
            "--seed",
            "17",
            "bounds",
            "--bound",
            "one-sided-bernstein",
            "--n",
            "100",
            "--t",
            "0.5",
            "--second-moment",
            "1",
        ],
    );
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["manifest"]["tool"], "survcred");
    assert_eq!(v["manifest"]["seed"], 17);
    assert_eq!(v["manifest"]["command"], "bounds");
    assert_eq!(v["manifest"]["version"], env!("CARGO_PKG_VERSION"));
    // exp(-n t^2 / s) = exp(-25)
    let value = v["value"]["value"].as_f64().unwrap();
    assert!((value - (-25f64).exp()).abs() < 1e-24);

    let out = survcred(
        d,
        &[
            "--format",
            "csv",
            "bounds",
            "--bound",
            "validation-sample-size",
            "--tau",
            "1",
            "--delta",
            "0.1",
            "--tol",
            "0.1",
        ],
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("key,value\n"));
    assert!(text.lines().any(|l| l == "value,185"));
    assert!(text.lines().any(|l| l == "manifest.command,bounds"));
}

#[test]
fn sweep_writes_tidy_trials_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = survcred(
        d,
        &[
            "--seed",
            "1",
            "sweep",
            "--experiment",
            "model-distance",
            "--trials",
            "5",
            "--d",
            "4",
            "--m",
            "1000",
            "--mu-grid",
            "0,2",
            "--tol-grid",
            "0.2",
            "--output",
            "out",
            "--quiet",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let mut rdr = csv::Reader::from_path(d.join("out/trials.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 10);
    let order: Vec<(String, String)> = rows.iter().map(|r| (r[0].to_string(), r[1].to_string())).collect();
    let mut sorted = order.clone();
    sorted.sort_by_key(|(g, t)| (g.parse::<u32>().unwrap(), t.parse::<u32>().unwrap()));
    assert_eq!(order, sorted);

    let summary = json_file(&d.join("out/summary.json"));
    let points = summary["points"].as_array().unwrap();
    assert_eq!(points.len(), 2);
    assert_eq!(points[0]["status"], "ok");
    assert_eq!(summary["manifest"]["seed"], 1);

    let out = survcred(d, &["sweep", "--experiment", "noise-comparison", "--trials", "0"]);
    assert_eq!(code(&out), 1);
}
