use std::path::Path;
use std::process::{Command, Output};

fn fdlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fdlab")).args(args).output().expect("binary runs")
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn out_arg(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

#[test]
fn stationary_writes_csv_and_versioned_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = fdlab(&["--out", &out_arg(tmp.path()), "stationary"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(tmp.path());
    assert_eq!(m["schema_version"], 1);
    assert_eq!(m["command"], "stationary");
    assert!(m["summary"]["residual"].as_f64().unwrap() < 1e-6);
    let text = std::fs::read_to_string(tmp.path().join("stationary.csv")).unwrap();
    let mut lines = text.split("\r\n");
    assert_eq!(lines.next(), Some("r,v"));
    // 17 significant digits.
    let first = lines.next().unwrap();
    let v = first.split(',').nth(1).unwrap();
    assert_eq!(v.split('e').next().unwrap().replace(['.', '-'], "").len(), 17, "{v}");
}

#[test]
fn same_seed_gives_identical_bytes() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&a, &b] {
        let out = fdlab(&["--out", &out_arg(dir.path()), "--seed", "7", "--threads", "3", "inequalities"]);
        assert!(out.status.success());
    }
    let read = |d: &tempfile::TempDir| std::fs::read(d.path().join("inequalities.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_eq!(manifest(a.path())["seed"], 7);
}

#[test]
fn bubble_sweep_restricted_to_one_case() {
    let tmp = tempfile::tempdir().unwrap();
    let out = fdlab(&["--out", &out_arg(tmp.path()), "bubbles", "--dim", "5", "--case", "b2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(tmp.path().join("interaction.csv")).unwrap();
    let rows: Vec<&str> = text.trim_end().split("\r\n").collect();
    assert_eq!(rows[0], "case,lambda1,lambda2,I1,I2,ratio");
    assert_eq!(rows.len(), 4);
    assert!(rows[1..].iter().all(|r| r.starts_with("B2,")));
}

#[test]
fn simulate_runs_a_short_rescaled_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"experiment": "rescaled", "grid": {"intervals": 64}, "b_over_lambda1": 0.3, "t_end": 1.0,
            "stabilize": false, "compare_stationary": true}"#,
    )
    .unwrap();
    let out = fdlab(&["--out", &out_arg(tmp.path()), "--config", cfg.to_str().unwrap(), "simulate"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let diag = std::fs::read_to_string(tmp.path().join("diagnostics.csv")).unwrap();
    assert!(diag.starts_with("t,F,M_1,M_2,R_min,R_max,mass,rel_err,sup_v,truncated\r\n"));
    assert_eq!(diag.trim_end().split("\r\n").count(), 12);
    let outputs = manifest(tmp.path())["outputs"].clone();
    assert_eq!(outputs, serde_json::json!(["trajectory.csv", "diagnostics.csv"]));
}

#[test]
fn fit_rate_reads_a_series() {
    let tmp = tempfile::tempdir().unwrap();
    let series = tmp.path().join("e.csv");
    let mut text = String::from("t,e\n");
    for k in 0..200 {
        let t = 5.0 + 0.1 * k as f64;
        text += &format!("{t},{}\n", 3.0 * (-0.4 * t).exp());
    }
    std::fs::write(&series, text).unwrap();
    let out = fdlab(&["--out", &out_arg(tmp.path()), "fit-rate", "--input", series.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(tmp.path());
    assert_eq!(m["summary"]["verdict"], "EXPONENTIAL");
    assert!((m["summary"]["gamma"].as_f64().unwrap() - 0.4).abs() < 1e-8);
}

#[test]
fn reproduce_reports_pass_lines() {
    let tmp = tempfile::tempdir().unwrap();
    let out = fdlab(&["--out", &out_arg(tmp.path()), "reproduce", "bubble-mass"]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.starts_with("PASS [ 9]"), "{stdout}");
    assert_eq!(manifest(tmp.path())["summary"]["passed"], 1);
}

#[test]
fn errors_exit_nonzero_and_name_the_problem() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = out_arg(tmp.path());

    let out = fdlab(&["--out", &out_dir, "reproduce", "no-such-suite"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("no-such-suite") && err.contains("bubble-mass"), "{err}");

    let bad = tmp.path().join("bad.json");
    std::fs::write(&bad, r#"{"experiment": "rescaled", "grid": {"radius": 0}}"#).unwrap();
    let out = fdlab(&["--out", &out_dir, "--config", bad.to_str().unwrap(), "simulate"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid.radius"));

    let out = fdlab(&["--out", &out_dir, "--config", bad.to_str().unwrap(), "stationary"]);
    assert!(!out.status.success());

    let out = fdlab(&["--out", &out_dir, "simulate"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("config"));

    let out = fdlab(&["--out", &out_dir, "fit-rate"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("input"));
    assert!(!out.status.success());

    let out = fdlab(&["--out", &out_dir, "--threads", "0", "inequalities"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("threads"));

    let out = fdlab(&["bogus-command"]);
    assert_eq!(out.status.code(), Some(2));
}
