use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cod(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cod")).args(args).output().expect("spawn cod")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn oscillator_reports_two_term_delta() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = cod(&["oscillator", "--omega-sq", "-(2*t)^2", "--t-max", "1", "--out-dir", out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&dir.path().join("oscillator_report.json"));
    assert_eq!(r["stop_reason"], "converged");
    let delta = r["two_term_delta"].as_f64().unwrap();
    assert!(delta > 0.02 && delta <= 0.0273, "delta {delta}");
    assert_eq!(r["term_bound_holds"], true);
    let csv = fs::read_to_string(dir.path().join("oscillator.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("t,re,im"));
    assert_eq!(csv.lines().count(), 1002);
}

#[test]
fn power_series_inequality_holds_on_every_row() {
    let dir = tempfile::tempdir().unwrap();
    for alpha in ["0", "0.5", "1", "2.5"] {
        let o = cod(&["power-series", "--alpha", alpha, "--t-max", "3", "--out-dir", dir.path().to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        let csv = fs::read_to_string(dir.path().join("power_series.csv")).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("t,f,upper_estimate,inequality"));
        assert!(lines.all(|l| l.ends_with(",true")), "alpha {alpha}");
    }
}

#[test]
fn exp_potential_residual_is_small() {
    let dir = tempfile::tempdir().unwrap();
    let o = cod(&["exp-potential", "--m", "1", "--amplitude", "1", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let r = json(&dir.path().join("exp_potential_report.json"));
    assert!(r["defect_sup_norm"].as_f64().unwrap() <= 1e-5);
}

#[test]
fn stationary_source_problem_converges() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = cod(&["stationary", "--potential", "-0.1*cos(x)", "--energy", "0.3", "--source", "cos(x)", "--out-dir", out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&dir.path().join("stationary_report.json"));
    assert_eq!(r["stop_reason"], "converged");
    assert!(r["defect_sup_norm"].as_f64().unwrap() < 1e-9);
}

#[test]
fn tdse_writes_step_log_and_matches_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = cod(&[
        "tdse", "--psi0", "exp(-x^2)", "--potential", "0.5*x^2", "--points", "64", "--box-length", "20",
        "--dt", "0.01", "--t-final", "0.2", "--oracle", "--out-dir", out,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let steps = fs::read_to_string(dir.path().join("tdse_steps.jsonl")).unwrap();
    assert_eq!(steps.lines().count(), 20);
    let r = json(&dir.path().join("tdse_report.json"));
    assert!(r["max_drift"].as_f64().unwrap() < 1e-9);
    assert!(r["crank_nicolson_distance"].as_f64().unwrap() < 1e-7);
}

#[test]
fn wave_divergence_exits_with_two_and_a_hint() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = cod(&["wave", "--s", "sin(x)", "--points", "64", "--t-max", "20", "--t-points", "201", "--out-dir", out]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("shorten the time window"), "{err}");
    assert_eq!(json(&dir.path().join("wave_report.json"))["stop_reason"], "divergence_detected");
}

#[test]
fn wave_reads_permittivity_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let eps = dir.path().join("eps.csv");
    let mut text = String::from("x,re\n");
    for i in 0..32 {
        let x = 2.0 * std::f64::consts::PI * i as f64 / 32.0;
        text.push_str(&format!("{x:?},{:?}\n", 1.0 + 0.2 * x.cos()));
    }
    fs::write(&eps, text).unwrap();
    let out = dir.path().to_str().unwrap();
    let o = cod(&[
        "wave", "--from-csv", eps.to_str().unwrap(), "--s", "sin(x)", "--t-max", "1", "--t-points", "101",
        "--snapshot", "0.5", "--out-dir", out,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&dir.path().join("wave_report.json"))["stop_reason"], "converged");
    let snap = fs::read_to_string(dir.path().join("wave_snapshot.csv")).unwrap();
    assert_eq!(snap.lines().count(), 33);
    let field = fs::read_to_string(dir.path().join("wave_field.csv")).unwrap();
    assert_eq!(field.lines().count(), 1 + 32 * 101);
}

#[test]
fn oscillator_reads_coefficient_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.csv");
    let mut text = String::from("t,re\n");
    for i in 0..=1000 {
        text.push_str(&format!("{:?},-1\n", i as f64 * 1e-3));
    }
    fs::write(&path, text).unwrap();
    let o = cod(&["oscillator", "--from-csv", path.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("oscillator.csv")).unwrap();
    let last: Vec<f64> = csv.lines().last().unwrap().split(',').map(|s| s.parse().unwrap()).collect();
    assert!((last[1] - 1f64.cosh()).abs() < 1e-6);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let out = d.path().to_str().unwrap();
        let o = cod(&["wave", "--s", "sin(x)", "--points", "16", "--t-max", "1", "--t-points", "51", "--out-dir", out]);
        assert_eq!(o.status.code(), Some(0));
    }
    for name in ["wave_field.csv", "wave_report.json"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}

#[test]
fn config_file_supplies_flags_and_command_line_wins() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# constant frequency\nomega-sq = -1\nt-max = 2\nstep = 1e-2\n").unwrap();
    let out = dir.path().to_str().unwrap();
    let o = cod(&["oscillator", "--config", cfg.to_str().unwrap(), "--t-max", "1", "--out-dir", out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&dir.path().join("oscillator_report.json"));
    assert_eq!(r["grid"]["count"], 101);
}

#[test]
fn usage_errors_exit_with_three() {
    assert_eq!(cod(&["oscillator", "--bogus"]).status.code(), Some(3));
    assert_eq!(cod(&["tdse", "--psi0", "1", "--dt", "0.03", "--t-final", "0.1"]).status.code(), Some(3));
    assert_eq!(cod(&["wave", "--s", "sin(x)", "--points", "7"]).status.code(), Some(3));
    assert_eq!(cod(&["oscillator", "--omega-sq", "sin(y)"]).status.code(), Some(3));
    let o = Command::new(env!("CARGO_BIN_EXE_cod")).args(["verify", "--quick"]).env("COD_THREADS", "zero").output().unwrap();
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(cod(&["--help"]).status.code(), Some(0));
}

#[test]
fn quick_verify_passes() {
    let o = cod(&["verify", "--quick"]);
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert_eq!(text.lines().filter(|l| l.contains("[PASS]")).count(), 10);
}
