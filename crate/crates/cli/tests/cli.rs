use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const ORTHOGONAL: &str = r#"{"dim":2,"states":[[[[1,0],[0,0]],[[0,0],[0,0]]],[[[0,0],[0,0]],[[0,0],[1,0]]]],"costs":[0,1]}"#;

fn cqcap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cqcap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, body).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr_json(out: &Output) -> Value {
    let text = String::from_utf8(out.stderr.clone()).unwrap();
    assert_eq!(text.trim_end().lines().count(), 1, "one-line error: {text}");
    serde_json::from_str(text.trim()).expect("stderr is JSON")
}

#[test]
fn unconstrained_orthogonal_pair() {
    let dir = TempDir::new().unwrap();
    let ch = write(&dir, "orth.json", ORTHOGONAL);
    let out = cqcap(&["capacity", "--channel", s(&ch)]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert!((report["result"]["capacity_bits"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert_eq!(report["result"]["constraint_active"], false);
    assert_eq!(report["input"]["sha256"].as_str().unwrap().len(), 64);
    assert_eq!(report["config"]["eps_bits"], 1e-6);
    assert!(report["trace_path"].is_null());
}

#[test]
fn cost_limit_and_trace() {
    let dir = TempDir::new().unwrap();
    let ch = write(&dir, "orth.json", ORTHOGONAL);
    let trace = dir.path().join("trace.csv");
    let out = cqcap(&[
        "capacity",
        "--channel",
        s(&ch),
        "--cost-limit",
        "0.3",
        "--trace",
        s(&trace),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    let result = &report["result"];
    assert!((result["capacity_bits"].as_f64().unwrap() - 0.881291).abs() < 1e-5);
    assert!((result["expected_cost"].as_f64().unwrap() - 0.3).abs() <= 1e-6);
    assert_eq!(result["constraint_active"], true);
    assert_eq!(report["trace_path"], s(&trace));

    let csv = fs::read_to_string(&trace).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("t,f_bits,lower_bits,upper_bits,expected_cost,l1_step")
    );
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert!(!rows.is_empty());
    for row in &rows {
        assert_eq!(row.len(), 6);
        assert!(row[2] <= row[3]);
    }
    for w in rows.windows(2) {
        assert!(w[1][1] >= w[0][1] - 1e-10);
        assert_eq!(w[1][0], w[0][0] + 1.0);
    }
}

#[test]
fn reports_are_deterministic_apart_from_timing() {
    let dir = TempDir::new().unwrap();
    let ch = dir.path().join("ch.json");
    assert!(cqcap(&[
        "gen",
        "--n",
        "3",
        "--m",
        "2",
        "--seed",
        "5",
        "--kind",
        "mixed",
        "--out",
        s(&ch),
        "--costs",
        "random"
    ])
    .status
    .success());
    let run = || {
        let mut v = stdout_json(&cqcap(&[
            "capacity",
            "--channel",
            s(&ch),
            "--cost-limit",
            "0.4",
        ]));
        v.as_object_mut().unwrap().remove("timing_seconds");
        v
    };
    assert_eq!(run(), run());
}

#[test]
fn malformed_file_exits_2() {
    let dir = TempDir::new().unwrap();
    let ch = write(&dir, "bad.json", "{ not json");
    let out = cqcap(&["capacity", "--channel", s(&ch)]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "Parse");

    let out = cqcap(&["capacity", "--channel", s(&dir.path().join("missing.json"))]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "Io");
}

#[test]
fn infeasible_budget_exits_3() {
    let dir = TempDir::new().unwrap();
    let ch = write(&dir, "costly.json", &ORTHOGONAL.replace("[0,1]", "[0.5,1]"));
    let out = cqcap(&["capacity", "--channel", s(&ch), "--cost-limit", "0.2"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stderr_json(&out)["error"], "InfeasibleCost");
    assert!(out.stdout.is_empty());
}

#[test]
fn validate_reports_dependence_without_failing() {
    let dir = TempDir::new().unwrap();
    let dup = r#"{"dim":2,"states":[[[[1,0],[0,0]],[[0,0],[0,0]]],[[[1,0],[0,0]],[[0,0],[0,0]]]]}"#;
    let ch = write(&dir, "dup.json", dup);
    let out = cqcap(&["validate", "--channel", s(&ch)]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert_eq!(report["independent"], false);
    assert_eq!(report["oracle"]["agrees"], true);
}

#[test]
fn validate_pure_pair_against_grid() {
    let dir = TempDir::new().unwrap();
    let ch = dir.path().join("pure.json");
    assert!(cqcap(&[
        "gen",
        "--n",
        "2",
        "--m",
        "2",
        "--seed",
        "7",
        "--kind",
        "pure",
        "--out",
        s(&ch)
    ])
    .status
    .success());
    let out = cqcap(&["validate", "--channel", s(&ch), "--oracle-grid", "1000"]);
    assert_eq!(out.status.code(), Some(0));
    let oracle = &stdout_json(&out)["oracle"];
    assert_eq!(oracle["grid_resolution"], 1000);
    assert!(oracle["gap_bits"].as_f64().unwrap().abs() < 1e-4);
}

#[test]
fn validate_rejects_bad_trace() {
    let dir = TempDir::new().unwrap();
    let ch = write(
        &dir,
        "trace.json",
        r#"{"dim":2,"states":[[[[0.6,0],[0,0]],[[0,0],[0.5,0]]]]}"#,
    );
    let out = cqcap(&["validate", "--channel", s(&ch)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_json(&out)["message"]
        .as_str()
        .unwrap()
        .contains("trace"));
}

#[test]
fn gen_is_byte_identical_and_valid() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let res = cqcap(&[
            "gen",
            "--n",
            "2",
            "--m",
            "2",
            "--seed",
            "7",
            "--kind",
            "pure",
            "--out",
            s(out),
        ]);
        assert_eq!(res.status.code(), Some(0));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(
        cqcap(&["validate", "--channel", s(&a)]).status.code(),
        Some(0)
    );
}

#[test]
fn gen_diagonal_has_exact_zero_off_diagonals() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("diag.json");
    let out = cqcap(&[
        "gen",
        "--n",
        "3",
        "--m",
        "3",
        "--seed",
        "1",
        "--kind",
        "diagonal",
        "--out",
        s(&path),
        "--costs",
        "uniform",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let file: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(file["costs"], serde_json::json!([1.0, 1.0, 1.0]));
    for state in file["states"].as_array().unwrap() {
        for (i, row) in state.as_array().unwrap().iter().enumerate() {
            for (j, entry) in row.as_array().unwrap().iter().enumerate() {
                if i != j {
                    assert_eq!(entry, &serde_json::json!([0.0, 0.0]));
                }
            }
        }
    }
}

#[test]
fn gen_random_costs_depend_on_seed() {
    let dir = TempDir::new().unwrap();
    let read_costs = |seed: &str| {
        let path = dir.path().join(format!("c{seed}.json"));
        assert!(cqcap(&[
            "gen",
            "--n",
            "4",
            "--m",
            "2",
            "--seed",
            seed,
            "--kind",
            "mixed",
            "--out",
            s(&path),
            "--costs",
            "random"
        ])
        .status
        .success());
        let file: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
        file["costs"].clone()
    };
    assert_eq!(read_costs("3"), read_costs("3"));
    assert_ne!(read_costs("3"), read_costs("4"));
}

#[test]
fn gen_rejects_bad_params() {
    let dir = TempDir::new().unwrap();
    let out = cqcap(&[
        "gen",
        "--n",
        "0",
        "--m",
        "2",
        "--seed",
        "1",
        "--kind",
        "pure",
        "--out",
        s(&dir.path().join("x.json")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = cqcap(&[
        "gen",
        "--n",
        "2",
        "--m",
        "2",
        "--seed",
        "1",
        "--kind",
        "pure",
        "--out",
        s(&dir.path().join("no/such/dir.json")),
    ]);
    assert_eq!(out.status.code(), Some(2));
}
