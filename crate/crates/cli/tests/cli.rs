use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn hzeta(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hzeta")).args(args).output().expect("run hzeta")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn split_writes_record_and_replays() {
    let dir = tempfile::tempdir().unwrap();
    let rec = dir.path().join("split.json");
    let o = hzeta(&[
        "split", "--k", "1", "--X", "10", "--t-start", "1e4", "--t-end", "1.01e4", "--json", rec.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = read_json(&rec);
    assert_eq!(v["operation"], "split");
    assert!(v["timestamp"].as_u64().unwrap() > 1_600_000_000);
    assert!(v["git-describe"].is_string());
    assert_eq!(v["params"]["config"]["command"], "split");
    let ratio = v["value"]["ratio"].as_f64().unwrap();
    let (pz, p, z) = (
        v["value"]["m_pz"].as_f64().unwrap(),
        v["value"]["m_p"].as_f64().unwrap(),
        v["value"]["m_z"].as_f64().unwrap(),
    );
    assert_eq!(ratio, pz / (p * z));
    // stdout carries the same record
    let out: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(out["value"], v["value"]);

    let again = hzeta(&["replay", rec.to_str().unwrap()]);
    assert!(again.status.success(), "{}", stderr(&again));

    // a tampered record no longer reproduces
    let mut bad = v.clone();
    bad["value"]["ratio"] = Value::from(ratio + 1e-9);
    let bad_path = dir.path().join("bad.json");
    std::fs::write(&bad_path, serde_json::to_string(&bad).unwrap()).unwrap();
    let o = hzeta(&["replay", bad_path.to_str().unwrap()]);
    assert!(!o.status.success());
}

#[test]
fn zeros_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("zeros.txt");
    let o = hzeta(&["zeros", "--to", "100", "--out", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# covered 0 100"));
    let zeros: Vec<f64> = text.lines().filter(|l| !l.starts_with('#')).map(|l| l.parse().unwrap()).collect();
    assert_eq!(zeros.len(), 29);
    assert!((zeros[0] - 14.134_725_141_734_694).abs() < 1e-6);
    // the file feeds other commands
    let o = hzeta(&["st-check", "--t", "60", "--X", "10", "--Y", "20", "--zeros", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn strict_mode_rejects_coarse_grid() {
    let args = ["moment", "--integrand", "euler-p", "--t-start", "1e5", "--t-end", "1.001e5", "--step", "0.5"];
    let lax = hzeta(&args);
    assert!(lax.status.success(), "{}", stderr(&lax));
    assert!(stderr(&lax).contains("warning"));
    let mut strict = vec!["--strict"];
    strict.extend(args);
    let o = hzeta(&strict);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("too coarse"));
}

#[test]
fn out_of_range_hybrid_names_the_precondition() {
    let o = hzeta(&["hybrid", "--t", "1000", "--X", "30"]);
    assert_eq!(o.status.code(), Some(2));
    let msg = stderr(&o);
    assert!(msg.contains("t^(1/3)") && msg.contains("--allow-out-of-range"), "{msg}");
}

#[test]
fn bad_arguments_are_usage_errors() {
    let o = hzeta(&["coeffs", "--kind", "beta", "--k", "1", "--X", "1"]);
    assert!(!o.status.success());
    let o = hzeta(&["split", "--k", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_suite_passes() {
    let o = hzeta(&["verify", "--suite", "arith"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["operation"], "verify");
    let o = hzeta(&["verify", "--suite", "nonsense"]);
    assert!(!o.status.success());
}

#[test]
fn tails_csv_and_plot_script() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("tails.csv");
    let o = hzeta(&[
        "tails", "--V", "0.5,1,2", "--X", "10", "--t-start", "1e4", "--t-end", "1.01e4", "--csv", csv.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().contains(','));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 3);
    let gp = std::fs::read_to_string(csv.with_extension("gp")).unwrap();
    assert!(gp.contains("tails.csv") && gp.contains("plot"));
}

#[test]
fn coefficient_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("beta.csv");
    let o = hzeta(&["coeffs", "--kind", "beta", "--k", "-1", "--X", "10", "--n-max", "1e3", "--csv", csv.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&csv).unwrap();
    let rows: Vec<(u64, f64)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let (n, c) = l.split_once(',').unwrap();
            (n.parse().unwrap(), c.parse().unwrap())
        })
        .collect();
    let get = |n: u64| rows.iter().find(|r| r.0 == n).map(|r| r.1);
    assert_eq!(get(1), Some(1.0));
    assert_eq!(get(2), Some(-1.0));
    assert_eq!(get(6), Some(1.0));
    // Möbius-like for k = -1 on X-power-bounded n
    assert_eq!(get(4).unwrap_or(0.0), 0.0);
    assert!(!text.contains(",-0\n"));
}
