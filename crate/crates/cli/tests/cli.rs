use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;
use zdet_cli::{payload_of, run, CliError, RunOptions, Status};

const MF: &str = r#"{"exp_of": {"coeffs": {"-1": [0.3, 0.0], "0": [0.2, 0.0], "1": [0.3, 0.0]}}}"#;

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn opts(config: PathBuf, out: &Path) -> RunOptions {
    RunOptions { out: Some(out.to_path_buf()), ..RunOptions::new(config) }
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path).unwrap().lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn hardy_selftest_residuals_are_small() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "h.json", r#"{"experiment": "hardy-selftest", "params": {"m_max": 2000}}"#);
    let s = run(&opts(cfg, &dir.path().join("out"))).unwrap();
    assert_eq!(s.status, Status::Pass);
    let rows = read_csv(&dir.path().join("out/hardy-selftest-v0001.faulhaber.csv"));
    assert!(!rows.is_empty());
    for r in rows {
        assert!(r[4].parse::<f64>().unwrap() <= 1e-9, "{r:?}");
    }
}

#[test]
fn zeta_of_multiplication_operator() {
    let dir = TempDir::new().unwrap();
    let text = format!(r#"{{"schema": "zdet/1", "experiment": "zeta", "operators": {{"A": {MF}}}}}"#);
    let s = run(&opts(write_config(dir.path(), "z.json", &text), dir.path())).unwrap();
    assert_eq!(s.status, Status::Pass);
    let fp = s.document["payload"]["w_q"]["finite_part"][0].as_f64().unwrap();
    assert!((fp + 0.2).abs() < 1e-6, "{fp}");
    assert_eq!(s.document["schema"], "zdet/1");
    assert_eq!(s.document["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn empty_n_range_is_a_config_error_without_outputs() {
    let dir = TempDir::new().unwrap();
    let text = format!(r#"{{"experiment": "szego", "operators": {{"A": {MF}}}, "params": {{"n_range": {{"start": 50, "end": 40}}}}}}"#);
    let out = dir.path().join("out");
    let err = run(&opts(write_config(dir.path(), "c.json", &text), &out)).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("params.ns"), "{err}");
    assert!(!out.exists());
}

#[test]
fn config_errors_carry_positions_and_fields() {
    let dir = TempDir::new().unwrap();
    let cases = [
        ("{\n \"experiment\": \"szego\",\n \"params\": {\"tolerence\": 1}\n}", "params.tolerence", ":3:"),
        ("{\"experiment\": \"plot\"}", "experiment", ":1:"),
        ("{\"experiment\": \"zeta\",", "", ":1:"),
        ("{\"experiment\": \"zeta\", \"schema\": \"zdet/0\"}", "schema", ""),
        ("{\"experiment\": \"zeta\"}", "operators.A", ""),
        ("{\"experiment\": \"zeta\", \"operators\": {\"A\": {\"path\": \"missing.json\"}}}", "operators.A", ""),
        ("{\"experiment\": \"szego\", \"operators\": {\"A\": {\"inline\": {\"terms\": []}}}, \"params\": {\"ns\": [10, 10]}}", "params.ns", ""),
    ];
    for (i, (text, field, pos)) in cases.into_iter().enumerate() {
        let err = run(&opts(write_config(dir.path(), &format!("c{i}.json"), text), &dir.path().join("out"))).unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, CliError::Config { .. }), "case {i}: {msg}");
        assert!(msg.contains(field) && msg.contains(pos), "case {i}: {msg}");
    }
    assert!(!dir.path().join("out").exists());
}

#[test]
fn numeric_failure_writes_an_error_report() {
    let dir = TempDir::new().unwrap();
    let zero = r#"{"inline": {"terms": [{"shift": 0, "plus": [], "minus": [], "exceptional": {"0": [0.0, 0.0]}}]}}"#;
    let text = format!(r#"{{"experiment": "szego", "operators": {{"A": {zero}}}, "params": {{"ns": [4, 5, 6, 7, 8, 9]}}}}"#);
    let s = run(&opts(write_config(dir.path(), "z.json", &text), dir.path())).unwrap();
    assert_eq!(s.status, Status::Error);
    assert_eq!(s.exit_code(), 3);
    assert_eq!(s.document["error"]["kind"], "Singular");
    assert!(s.report_path.exists());
}

#[test]
fn operator_files_resolve_relative_to_the_config() {
    let dir = TempDir::new().unwrap();
    fs::create_dir(dir.path().join("ops")).unwrap();
    let diag = r#"{"terms":[{"shift":0,"plus":[[2.0,0.0]],"minus":[[2.0,0.0]],"exceptional":{"0":[2.0,0.0]}}]}"#;
    fs::write(dir.path().join("ops/two.json"), diag).unwrap();
    let text = r#"{"experiment": "szego", "operators": {"A": {"path": "ops/two.json"}}, "params": {"n_range": {"start": 20, "end": 40, "step": 2}}}"#;
    let cfg = write_config(dir.path(), "c.json", text);
    let s = run(&opts(cfg.clone(), &dir.path().join("out"))).unwrap();
    let slope = s.document["payload"]["slope"][0].as_f64().unwrap();
    assert!((slope - 2.0 * 2f64.ln()).abs() < 1e-10, "{slope}");

    // editing the referenced file changes the hash even though the config text does not
    fs::write(dir.path().join("ops/two.json"), diag.replace("2.0", "3.0")).unwrap();
    let t = run(&opts(cfg, &dir.path().join("out"))).unwrap();
    assert_ne!(s.document["config_hash"], t.document["config_hash"]);
}

#[test]
fn reruns_append_versions_with_identical_payloads() {
    let dir = TempDir::new().unwrap();
    let cache = dir.path().join("cache");
    let text = format!(
        r#"{{"experiment": "compare", "operators": {{"A": {MF}, "S": {{"smoothing": {{"amplitude": 0.01, "width": 3.0, "support": 8}}}}}},
            "params": {{"szego": {{"n_min": 30, "n_max": 60, "stride": 3}}, "zeta": {{"n_outer": 60}}, "regularizer": {{"zero_mode": "identity"}}}}}}"#
    );
    let cfg = write_config(dir.path(), "c.json", &text);
    let cold = run(&RunOptions { cache: Some(cache.clone()), seed: Some(5), ..opts(cfg.clone(), dir.path()) }).unwrap();
    let warm = run(&RunOptions { cache: Some(cache), threads: 3, seed: Some(5), ..opts(cfg.clone(), dir.path()) }).unwrap();
    let uncached = run(&RunOptions { seed: Some(5), ..opts(cfg.clone(), dir.path()) }).unwrap();
    assert!(dir.path().join("compare-v0001.json").exists() && dir.path().join("compare-v0003.json").exists());
    assert_eq!(cold.document["metadata"]["cache"]["hits"], 0);
    assert!(warm.document["metadata"]["cache"]["hits"].as_u64().unwrap() > 0);
    assert_eq!(payload_of(&cold.document), payload_of(&warm.document));
    assert_eq!(payload_of(&cold.document), payload_of(&uncached.document));
    let first = fs::read_to_string(dir.path().join("compare-v0001.json")).unwrap();
    assert_eq!(payload_of(&serde_json::from_str::<Value>(&first).unwrap()), payload_of(&cold.document));

    let reseeded = run(&RunOptions { seed: Some(6), ..opts(cfg, dir.path()) }).unwrap();
    assert_ne!(reseeded.document["config_hash"], cold.document["config_hash"]);
    assert_ne!(reseeded.document["payload"], cold.document["payload"]);
}

#[test]
fn binary_reports_status_and_exit_code() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "d.json", r#"{"experiment": "decomp-check", "params": {"seeds": [1, 2], "n": 12}}"#);
    let out = Command::new(env!("CARGO_BIN_EXE_zdet"))
        .args(["--config", cfg.to_str().unwrap(), "--out", dir.path().join("r").to_str().unwrap(), "--threads", "2"])
        .env("ZDET_CACHE", dir.path().join("cache"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("pass "));

    let failing = write_config(dir.path(), "f.json", r#"{"experiment": "decomp-check", "params": {"seeds": [1], "tolerance": 1e-30}}"#);
    let status = Command::new(env!("CARGO_BIN_EXE_zdet"))
        .args(["--config", failing.to_str().unwrap(), "--out", dir.path().join("r").to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));

    let bad = write_config(dir.path(), "b.json", "{");
    let out = Command::new(env!("CARGO_BIN_EXE_zdet")).args(["--config", bad.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("b.json:1:"));
}

#[test]
fn anomaly_and_cocycle_report_diagnostics() {
    let dir = TempDir::new().unwrap();
    let text = r#"{"experiment": "cocycle",
        "operators": {"A": {"near_identity": {"seed": 11, "bandwidth": 1, "order": 3, "amplitude": 0.12}},
                      "B": {"near_identity": {"seed": 111, "bandwidth": 2, "order": 3, "amplitude": 0.08}}},
        "params": {"zeta": {"n_outer": 160}, "regularizer": {"zero_mode": "identity"}, "doubling": false}}"#;
    let s = run(&opts(write_config(dir.path(), "c.json", text), dir.path())).unwrap();
    let coarse = &s.document["payload"]["coarse"];
    assert_eq!(coarse["experiment"], "cocycle");
    assert!(coarse["diagnostics"]["n_outer"].as_f64() == Some(160.0));
    assert_ne!(s.status, Status::Error);

    let text = r#"{"experiment": "anomaly",
        "operators": {"A": {"near_identity": {"bandwidth": 1, "order": 3, "amplitude": 0.1}},
                      "B": {"near_identity": {"seed": 9, "bandwidth": 1, "order": 3, "amplitude": 0.1}}},
        "params": {"zeta": {"n_outer": 60}, "regularizer": {"zero_mode": "identity"}}}"#;
    let s = run(&opts(write_config(dir.path(), "a.json", text), dir.path())).unwrap();
    assert_eq!(s.status, Status::Unchecked);
    assert!(s.document["payload"]["kappa"][0].as_f64().unwrap().is_finite());
}

#[test]
fn symb2d_verify_small_grid() {
    let dir = TempDir::new().unwrap();
    let text = r#"{"experiment": "symb2d-verify",
        "symbols": {"log_a": {"random": {"seed": 1, "max_mode": 2, "amplitude": 0.5}},
                    "log_b": {"random": {"seed": 2, "max_mode": 2, "amplitude": 0.5}},
                    "log_q": {"random": {"seed": 3, "max_mode": 2, "amplitude": 0.5, "log_coeff": 1.0}}},
        "params": {"ns": [32, 64]}}"#;
    let s = run(&opts(write_config(dir.path(), "s.json", text), dir.path())).unwrap();
    assert_eq!(s.status, Status::Pass, "{:#}", s.document["checks"]);
    assert_eq!(s.document["payload"]["grids"].as_array().unwrap().len(), 2);
}
