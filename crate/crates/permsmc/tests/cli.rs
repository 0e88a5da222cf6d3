use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const TOY: &str = "3\n1 1 0\n0 1 1\n1 1 0\n";

fn permsmc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_permsmc")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn schedule_prints_r_and_factor() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "toy.txt", TOY);
    let v = json(&permsmc(&["schedule", "--matrix", m.to_str().unwrap()]));
    assert_eq!(v["n"], 3);
    assert_eq!(v["r"], 16);
    assert!((v["step_factor"].as_f64().unwrap() - 2f64.powf(-1.0 / 6.0)).abs() < 1e-15);
    assert!((v["phi_final_nonedge"].as_f64().unwrap() - 1.0 / 6.0).abs() < 1e-12);
    let half = json(&permsmc(&["schedule", "--matrix", m.to_str().unwrap(), "--step-factor", "0.5"]));
    assert_eq!(half["r"], 3);
}

#[test]
fn exact_estimate_of_toy() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "toy.txt", TOY);
    let out = dir.path().join("out");
    let v = json(&permsmc(&[
        "estimate",
        "--matrix",
        m.to_str().unwrap(),
        "--method",
        "exact",
        "--out",
        out.to_str().unwrap(),
    ]));
    assert_eq!(v["exact"], "2");
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary, v);
    assert!(out.join("timing.json").exists());
}

#[test]
fn estimate_writes_csv_and_json_runs() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "toy.txt", TOY);
    for format in ["csv", "json"] {
        let out = dir.path().join(format);
        let v = json(&permsmc(&[
            "estimate",
            "--matrix",
            m.to_str().unwrap(),
            "--method",
            "adaptive",
            "--particles",
            "300",
            "--ess-threshold",
            "150",
            "--delta",
            "1e-10",
            "--sweeps",
            "9",
            "--seed",
            "4",
            "--estimator",
            "both",
            "--repeats",
            "3",
            "--out",
            out.to_str().unwrap(),
            "--format",
            format,
        ]));
        assert_eq!(v["repeats"], 3);
        assert_eq!(v["N"], 300);
        assert_eq!(v["T"], 150.0);
        assert!(v["est1"]["relative_variance"].is_number());
        if format == "csv" {
            let text = std::fs::read_to_string(out.join("runs.csv")).unwrap();
            assert!(text.starts_with("repeat,seed,estimate_est1,estimate_est2,log_gamma,resample_count\n"));
            assert_eq!(text.lines().count(), 4);
        } else {
            let runs: Value = serde_json::from_str(&std::fs::read_to_string(out.join("runs.json")).unwrap()).unwrap();
            let first = &runs[0];
            for key in [
                "n",
                "mode",
                "N",
                "T",
                "delta",
                "seed",
                "r",
                "estimate_est1",
                "estimate_est2",
                "log_gamma",
                "ess_trace",
                "lambda_trace",
                "resample_steps",
                "wall_time_s",
            ] {
                assert!(first.get(key).is_some(), "missing {key}");
            }
            assert_eq!(first["mode"], "adaptive");
            assert_eq!(runs.as_array().unwrap().len(), 3);
        }
    }
}

#[test]
fn sa_reports_mode_sa() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "toy.txt", TOY);
    let v = json(&permsmc(&[
        "estimate",
        "--matrix",
        m.to_str().unwrap(),
        "--method",
        "sa",
        "--particles",
        "200",
    ]));
    assert_eq!(v["mode"], "SA");
    assert_eq!(v["est1"]["relative_variance"], "unavailable");
}

#[test]
fn diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "toy.txt", TOY);
    let m = m.to_str().unwrap();
    let lemma = json(&permsmc(&["diagnose", "--matrix", m, "--lemma1"]));
    assert_eq!(lemma["all_passed"], true);
    assert_eq!(lemma["steps"].as_array().unwrap().len(), 16);
    let gap = json(&permsmc(&["diagnose", "--matrix", m, "--gap"]));
    assert!(gap["min_absolute_gap"].as_f64().unwrap() > 0.0);
    let c = json(&permsmc(&[
        "diagnose",
        "--matrix",
        m,
        "--constants",
        "--c-poincare",
        "1000",
        "--particles",
        "5000",
    ]));
    assert!((c["tau"].as_f64().unwrap() - 80.0 / 9.0).abs() < 1e-12);
    assert_eq!(c["r"], 16);
    assert!(c["condition_holds"].is_boolean());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "toy.txt", TOY);
    let good = good.to_str().unwrap();
    let bad = write(dir.path(), "bad.txt", "2\n1 0\n0 2\n");
    let out = permsmc(&["schedule", "--matrix", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3, column 2"));

    let missing = dir.path().join("nope.txt");
    assert_eq!(permsmc(&["schedule", "--matrix", missing.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(permsmc(&["estimate", "--matrix", good, "--particles", "0"]).status.code(), Some(2));
    assert_eq!(permsmc(&["estimate", "--matrix", good, "--repeats", "0"]).status.code(), Some(2));
    assert_eq!(permsmc(&["estimate", "--matrix", good, "--method", "nope"]).status.code(), Some(2));
    assert_eq!(permsmc(&["diagnose", "--matrix", good]).status.code(), Some(2));

    let six = "6\n".to_string() + &"1 1 1 1 1 0\n".repeat(6);
    let six = write(dir.path(), "six.txt", &six);
    let six = six.to_str().unwrap();
    assert_eq!(permsmc(&["diagnose", "--matrix", six, "--lemma1"]).status.code(), Some(3));
    assert_eq!(permsmc(&["diagnose", "--matrix", six, "--gap"]).status.code(), Some(3));
    let big = "31\n".to_string() + &format!("{}\n", vec!["1"; 31].join(" ")).repeat(31);
    let big = write(dir.path(), "big.txt", &big);
    let out = permsmc(&["estimate", "--matrix", big.to_str().unwrap(), "--method", "exact"]);
    assert_eq!(out.status.code(), Some(3));
    let eight = "8\n".to_string() + &"1 1 1 1 1 1 1 0\n".repeat(8);
    let eight = write(dir.path(), "eight.txt", &eight);
    let out = permsmc(&["estimate", "--matrix", eight.to_str().unwrap(), "--method", "ideal", "--particles", "10"]);
    assert_eq!(out.status.code(), Some(3));
}
