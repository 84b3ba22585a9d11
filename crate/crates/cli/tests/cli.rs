use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn dampwave(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dampwave")).args(args).env_remove("DAMPWAVE_OUTPUT_DIR").output().expect("spawn dampwave")
}

fn in_dir(dir: &Path, args: &[&str]) -> Output {
    let mut all: Vec<&str> = args.to_vec();
    all.extend(["--output-dir", dir.to_str().unwrap()]);
    dampwave(&all)
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn exponent_table() {
    let o = dampwave(&["exponents", "--n", "2", "--mu", "0.5", "--p", "2"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("lifespan exponent  0.666666666667"));
    let o = dampwave(&["exponents", "--n", "3", "--mu", "0"]);
    assert!(stdout(&o).contains("p_S(n+mu)          2.414213562373"));
    let o = dampwave(&["exponents", "--n", "2", "--mu", "1", "--p", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("mu = 1 is excluded"));
}

#[test]
fn ode_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    let o = in_dir(dir.path(), &["ode-blowup", "--fixture", "cubic", "--delta", "2"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let r = report(dir.path());
    let t = r["results"]["T_est"].as_f64().unwrap();
    assert!((t - 2f64.sqrt() / 2.0).abs() < 0.01 * t);

    let o = in_dir(dir.path(), &["ode-blowup", "--m", "0", "--horizon", "50"]);
    assert!(o.status.success());
    assert_eq!(report(dir.path())["results"]["reason"], "horizon_reached");

    let o = in_dir(dir.path(), &["ode-blowup", "--deltas", "1e-4,3e-4,1e-3,3e-3,1e-2", "--horizon", "1e9"]);
    assert!(o.status.success());
    let r = report(dir.path());
    assert!(r["results"]["relative_slope_error"].as_f64().unwrap() < 0.1);
}

#[test]
fn solve_reports_lifespan() {
    let dir = tempfile::tempdir().unwrap();
    let o = in_dir(dir.path(), &["solve", "--count", "257", "--t-max", "20", "--emit-frames", "true"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(dir.path());
    assert_eq!(r["results"]["report"]["blew_up"], true);
    assert!(r["results"]["lifespan"]["T"].as_f64().unwrap() > 0.0);
    assert!(r["results"]["lifespan"]["uncertainty"].as_f64().unwrap() >= 0.0);
    assert!(dir.path().join("trajectory.csv").exists());
    assert!(dir.path().join("trajectory.bin").exists());
    assert!(dir.path().join("timings.json").exists());
}

#[test]
fn solve_with_checks() {
    let dir = tempfile::tempdir().unwrap();
    let o = in_dir(dir.path(), &["solve", "--picture", "transformed", "--count", "257", "--t-max", "6", "--checks", "f1,chain"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS holder_chain"));
    let o = in_dir(dir.path(), &["solve", "--checks", "nonsense"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn inadmissible_needs_exploratory() {
    let dir = tempfile::tempdir().unwrap();
    let o = in_dir(dir.path(), &["solve", "--n", "3", "--p", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--exploratory"));
    let o = in_dir(dir.path(), &["solve", "--n", "3", "--p", "3", "--exploratory", "true", "--count", "129", "--t-max", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn sweep_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = in_dir(dir.path(), &["sweep", "--count", "257", "--epsilons", "0.4,0.3,0.2,0.1", "--jobs", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.starts_with("epsilon,T,uncertainty,T_transformed\n"));
    assert!(std::fs::read_to_string(dir.path().join("sweep.gp")).unwrap().contains("logscale"));
    let r = report(dir.path());
    assert!((r["results"]["expected_slope"].as_f64().unwrap() + 2.0 / 3.0).abs() < 1e-12);
    assert_eq!(r["results"]["short_range"], true);
}

#[test]
fn verify_and_seeded_fault() {
    let dir = tempfile::tempdir().unwrap();
    let o = in_dir(dir.path(), &["verify"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
    let o = in_dir(dir.path(), &["verify", "--seed-fault", "c-ell"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("FAIL lambda_normalization"));
    assert_eq!(out.matches("FAIL").count(), 1);
    let extremes = &report(dir.path())["results"]["lambda_ratio_extremes"];
    assert_eq!(extremes.as_array().unwrap().len(), 4);
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "mu = 1.5\ncount = 129\nt_max = 3.0\nlevels = 1\n").unwrap();
    let out = dir.path().join("out");
    let o = dampwave(&["solve", "--config", cfg.to_str().unwrap(), "--count", "257", "--output-dir", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    assert_eq!(r["config"]["settings"]["params"]["mu"], 1.5);
    assert_eq!(r["config"]["settings"]["solver"]["count"], 257);

    std::fs::write(&cfg, "speed = 2\n").unwrap();
    let o = dampwave(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = dampwave(&["solve", "--cfl", "0.95"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_dampwave"))
        .args(["ode-blowup", "--fixture", "cubic", "--delta", "1"])
        .env("DAMPWAVE_OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(dir.path().join("report.json").exists());
}

#[test]
fn transform_check_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = in_dir(dir.path(), &["transform-check", "--count", "257", "--levels", "3"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert_eq!(report(dir.path())["results"]["ratios"].as_array().unwrap().len(), 2);
}

#[test]
fn numerical_failure_exit_code() {
    // too short a horizon for any blow-up
    let dir = tempfile::tempdir().unwrap();
    let o = in_dir(dir.path(), &["sweep", "--count", "129", "--t-max", "1", "--epsilons", "0.4,0.3,0.2,0.1"]);
    assert_eq!(o.status.code(), Some(3));
}
