use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_degen-taxis");

const HOMOG: &str = "\
# homogeneous decay
grid.nx = 12
grid.ny = 12
params.ell = 0
params.eps = 0
step.t_end = 0.2
step.snapshot_times = 0.1
diag.stride = 5
";

fn cmd(args: &[&str]) -> Command {
    let mut c = Command::new(BIN);
    c.args(args).env_remove("DEGEN_TAXIS_OUT");
    c
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn simulate(dir: &Path, cfg: &str, out: &str) -> Output {
    let path = dir.join("run.cfg");
    fs::write(&path, cfg).unwrap();
    cmd(&["simulate", "--config", path.to_str().unwrap(), "--seed", "1", "--out", out])
        .output()
        .unwrap()
}

#[test]
fn simulate_writes_artifacts_that_recheck_cleanly() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("a");
    let o = simulate(tmp.path(), HOMOG, out.to_str().unwrap());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout_json(&o)["pass"], Value::Bool(true));
    for f in ["series.csv", "summary.json", "snapshots/u_0000.pgm", "snapshots/v_0001.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let summary: Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["steps"]["t_final"], 0.2);
    let meta: Value = serde_json::from_str(&fs::read_to_string(out.join("snapshots/v_0001.json")).unwrap()).unwrap();
    assert!((meta["t"].as_f64().unwrap() - 0.2).abs() < 1e-12);
    assert!((meta["max"].as_f64().unwrap() - (-0.2f64).exp()).abs() < 2e-3);

    let series = out.join("series.csv");
    let o = cmd(&["invariants", "--series", series.to_str().unwrap()]).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout_json(&o)["pass"], Value::Bool(true));
}

#[test]
fn identical_config_and_seed_give_identical_files() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = format!("{HOMOG}params.ell = 1\n").replace("params.ell = 0\n", "");
    let cfg = cfg.replace("params.eps = 0\n", "init.u0 = random(1, 0.1)\n");
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    // exit 1 (a failed check) still writes every artifact
    assert!(simulate(tmp.path(), &cfg, a.to_str().unwrap()).status.code().is_some_and(|c| c < 2));
    assert!(simulate(tmp.path(), &cfg, b.to_str().unwrap()).status.code().is_some_and(|c| c < 2));
    for f in ["series.csv", "snapshots/u_0000.pgm", "snapshots/u_0001.pgm", "snapshots/v_0001.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn tampered_series_fails_the_recheck() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("a");
    assert_eq!(simulate(tmp.path(), HOMOG, out.to_str().unwrap()).status.code(), Some(0));
    let text = fs::read_to_string(out.join("series.csv")).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let last = lines.len() - 1;
    let mut cols: Vec<String> = lines[last].split(',').map(String::from).collect();
    cols[2] = format!("{:.16e}", 5.0); // mass_v jumps up
    lines[last] = cols.join(",");
    let bad = tmp.path().join("tampered.csv");
    fs::write(&bad, lines.join("\n") + "\n").unwrap();

    let o = cmd(&["invariants", "--series", bad.to_str().unwrap()]).output().unwrap();
    assert_ne!(o.status.code(), Some(0));
    let report = stdout_json(&o);
    let failed: Vec<&str> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["pass"] == Value::Bool(false))
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(failed.contains(&"mass_v_monotone"), "{failed:?}");
}

#[test]
fn moser_reports_the_bound() {
    let o = cmd(&["moser", "--a", "1", "--b", "1", "--d", "0", "--m0", "1", "--kmax", "20"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert!((v["bound"].as_f64().unwrap() - 2.0 * 2f64.sqrt()).abs() < 1e-12);
    assert_eq!(v["pass"], Value::Bool(true));
}

#[test]
fn errors_are_json_on_stderr() {
    let tmp = tempfile::tempdir().unwrap();
    let o = simulate(tmp.path(), "params.chi = -1\n", tmp.path().to_str().unwrap());
    assert_eq!(o.status.code(), Some(2));
    let e: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(e["error"], "RangeError");
    assert!(e["message"].as_str().unwrap().contains("chi > 0"));

    let o = simulate(tmp.path(), "grid.nx = 8\nfoo = 1\n", tmp.path().to_str().unwrap());
    let e: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(e["error"], "UnknownKey");

    let o = cmd(&["ineq", "--which", "C"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let e: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert!(e["message"].as_str().unwrap().contains("unknown inequality"));

    let o = cmd(&["frobnicate"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(serde_json::from_slice::<Value>(&o.stderr).unwrap()["error"], "UsageError");
}

#[test]
fn ineq_output_does_not_depend_on_threads() {
    let run = |threads: &str| {
        cmd(&["--threads", threads, "ineq", "--which", "A", "--samples", "24", "--n", "12", "--seed", "5"])
            .output()
            .unwrap()
    };
    let (a, b) = (run("1"), run("3"));
    assert!(a.status.code().is_some_and(|c| c < 2));
    assert_eq!(a.stdout, b.stdout);
    let v = stdout_json(&a);
    assert!(v["stats"][0]["max"].as_f64().unwrap().is_finite());
}

#[test]
fn output_directory_comes_from_the_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    fs::write(&cfg, format!("{HOMOG}output.dir = {}\n", tmp.path().join("cfg_dir").display())).unwrap();
    let env_dir = tmp.path().join("env_dir");
    let o = Command::new(BIN)
        .args(["simulate", "--config", cfg.to_str().unwrap()])
        .env("DEGEN_TAXIS_OUT", &env_dir)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(env_dir.join("series.csv").exists());
    assert!(!tmp.path().join("cfg_dir").exists());
}

#[test]
fn experiment_writes_a_report() {
    let tmp = tempfile::tempdir().unwrap();
    let o = cmd(&[
        "experiment",
        "homogeneous",
        "--resolution",
        "8",
        "--t-end",
        "0.1",
        "--out",
        tmp.path().to_str().unwrap(),
    ])
    .output()
    .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("homogeneous/report.json")).unwrap()).unwrap();
    assert_eq!(report["study"], "single_run");
    assert!(tmp.path().join("homogeneous/homogeneous/series.csv").exists());
}
