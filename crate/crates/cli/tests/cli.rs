use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn tvgam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tvgam"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(text: &str) -> serde_json::Value {
    serde_json::from_str(text).unwrap()
}

const REGRESSION: &str = "a,b,y\n0.5,3,1.25\n1.5,1,-0.5\n2.5,2,2.0\n3.5,0,0.75\n";

fn predictions(text: &str) -> Vec<f64> {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("prediction"));
    lines.map(|l| l.parse().unwrap()).collect()
}

#[test]
fn fit_is_deterministic_and_round_trips() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "train.csv", REGRESSION);
    let m1 = dir.path().join("m1.json");
    let m2 = dir.path().join("m2.json");
    for m in [&m1, &m2] {
        let out = tvgam(&["fit", "--input", s(&data), "--target", "y", "--lambda", "0.05", "--seed", "7", "--out", s(m)]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
    let text = std::fs::read_to_string(&m1).unwrap();
    assert_eq!(text, std::fs::read_to_string(&m2).unwrap());
    let doc = json(&text);
    assert_eq!(doc["format_version"], 1);
    assert_eq!(doc["p"], 2);
    assert_eq!(doc["feature_names"], serde_json::json!(["a", "b"]));
    assert_eq!(doc["fit"]["seed"], 7);
    assert_eq!(doc["fit"]["loss"], "squared");
    let file = tvgam_cli::model_file::ModelFile::from_json(&text).unwrap();
    assert_eq!(file.to_json(), text);
}

#[test]
fn unpenalized_fit_reproduces_targets() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "train.csv", REGRESSION);
    let model = dir.path().join("m.json");
    let out = tvgam(&["fit", "--input", s(&data), "--target", "y", "--lambda", "0", "--out", s(&model)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let out = tvgam(&["predict", "--model", s(&model), "--input", s(&data), "--target", "y"]);
    assert_eq!(code(&out), 0);
    for (p, y) in predictions(&stdout(&out)).iter().zip([1.25, -0.5, 2.0, 0.75]) {
        assert!((p - y).abs() <= 1e-8, "{p} vs {y}");
    }
}

#[test]
fn huge_lambda_gives_empty_weight_functions() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "train.csv", REGRESSION);
    let model = dir.path().join("m.json");
    let out = tvgam(&["fit", "--input", s(&data), "--target", "y", "--lambda", "1e9", "--out", s(&model)]);
    assert_eq!(code(&out), 0);
    let doc = json(&std::fs::read_to_string(&model).unwrap());
    assert_eq!(doc["weight_functions"], serde_json::json!([[], []]));
    assert_eq!(doc["budget_used"], 0.0);
    let out = tvgam(&["predict", "--model", s(&model), "--input", s(&data), "--target", "y"]);
    assert!(predictions(&stdout(&out)).iter().all(|&p| p == 0.0));
}

#[test]
fn zero_model_predicts_intercept() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "train.csv", "a,y\n0,5\n1,5\n2,5\n");
    let model = dir.path().join("m.json");
    let out = tvgam(&["fit", "--input", s(&data), "--target", "y", "--lambda", "1e9", "--intercept", "--out", s(&model)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let out = tvgam(&["predict", "--model", s(&model), "--input", s(&data), "--target", "y"]);
    for p in predictions(&stdout(&out)) {
        assert!((p - 5.0).abs() < 1e-9);
    }
}

#[test]
fn lambda_grid_writes_suffixed_files() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "train.csv", REGRESSION);
    let model = dir.path().join("model.json");
    let report = dir.path().join("report.jsonl");
    let out = tvgam(&[
        "fit", "--input", s(&data), "--target", "y", "--lambda", "0.01,0.1,1",
        "--out", s(&model), "--report", s(&report),
    ]);
    assert_eq!(code(&out), 0);
    for i in 0..3 {
        assert!(dir.path().join(format!("model_lambda{i}.json")).exists());
    }
    assert!(!model.exists());
    let lines: Vec<_> = std::fs::read_to_string(&report).unwrap().lines().map(json).collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[1]["lambda"], 0.1);
    assert_eq!(lines[2]["converged"], true);
}

#[test]
fn nonsmooth_loss_uses_interval_lasso() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "train.csv", "a,y\n0,1\n1,-1\n2,1\n3,1\n");
    let model = dir.path().join("m.json");
    let out = tvgam(&["fit", "--input", s(&data), "--target", "y", "--loss", "hinge", "--lambda", "0.1", "--out", s(&model)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(stdout(&out).trim())["solver"], "interval_lasso");
    let out = tvgam(&["fit", "--input", s(&data), "--target", "y", "--loss", "hinge", "--lambda", "0.1", "--intercept", "--out", s(&model)]);
    assert_eq!(code(&out), 2);
}

#[test]
fn iteration_limit_exits_four() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "train.csv", "a,b,y\n0,1,1\n1,0,-1\n2,2,1\n3,1,-1\n4,0,1\n");
    let model = dir.path().join("m.json");
    let out = tvgam(&[
        "fit", "--input", s(&data), "--target", "y", "--loss", "logistic", "--lambda", "0.01",
        "--max-iters", "1", "--tol", "1e-15", "--out", s(&model),
    ]);
    assert_eq!(code(&out), 4);
    assert!(model.exists());
}

#[test]
fn extension_flag_changes_only_out_of_range_rows() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "train.csv", "a,y\n0,1\n1,2\n2,3\n");
    let model = dir.path().join("m.json");
    assert_eq!(code(&tvgam(&["fit", "--input", s(&data), "--target", "y", "--lambda", "0", "--out", s(&model)])), 0);
    let probe = write(&dir, "probe.csv", "a\n-1\n0\n1\n2\n5\n");
    let run = |ext| predictions(&stdout(&tvgam(&["predict", "--model", s(&model), "--input", s(&probe), "--extension", ext])));
    let compact = run("compact");
    let clamp = run("clamp");
    assert_eq!(compact[1..4], clamp[1..4]);
    assert_eq!((compact[0], clamp[0]), (0.0, 1.0));
    assert_eq!(clamp[4], 3.0);
}

#[test]
fn data_errors_exit_three() {
    let dir = TempDir::new().unwrap();
    let nan = write(&dir, "nan.csv", "a,y\n1,2\nNaN,3\n");
    let out = tvgam(&["fit", "--input", s(&nan), "--target", "y", "--lambda", "1", "--out", s(&dir.path().join("m.json"))]);
    assert_eq!(code(&out), 3);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("row 2") && err.contains("\"a\""), "{err}");

    let dup = write(&dir, "dup.csv", "a,a,y\n1,2,3\n");
    assert_eq!(code(&tvgam(&["fit", "--input", s(&dup), "--target", "y", "--lambda", "1", "--out", "x.json"])), 3);
    let empty = write(&dir, "empty.csv", "");
    assert_eq!(code(&tvgam(&["fit", "--input", s(&empty), "--target", "y", "--lambda", "1", "--out", "x.json"])), 3);
    let ok = write(&dir, "ok.csv", REGRESSION);
    assert_eq!(code(&tvgam(&["fit", "--input", s(&ok), "--target", "z", "--lambda", "1", "--out", "x.json"])), 3);

    let model = dir.path().join("m.json");
    assert_eq!(code(&tvgam(&["fit", "--input", s(&ok), "--target", "y", "--lambda", "1", "--out", s(&model)])), 0);
    let narrow = write(&dir, "narrow.csv", "a\n1\n");
    assert_eq!(code(&tvgam(&["predict", "--model", s(&model), "--input", s(&narrow)])), 3);
}

#[test]
fn config_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let ok = write(&dir, "ok.csv", REGRESSION);
    assert_eq!(code(&tvgam(&["fit", "--input", s(&ok), "--target", "y", "--lambda", "-1", "--out", "x.json"])), 2);
    assert_eq!(code(&tvgam(&["fit", "--input", s(&ok), "--target", "y", "--loss", "cubic", "--lambda", "1", "--out", "x.json"])), 2);
    // Randomized commands refuse to run without a seed.
    assert_eq!(code(&tvgam(&["complexity", "--p", "3", "--m", "10"])), 2);
    assert_eq!(code(&tvgam(&["tightness", "--p", "4", "--m", "16"])), 2);
}

#[test]
fn evaluate_reports_objective() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "train.csv", REGRESSION);
    let model = dir.path().join("m.json");
    let out = tvgam(&["fit", "--input", s(&data), "--target", "y", "--lambda", "0.2", "--out", s(&model)]);
    let fitted = json(stdout(&out).trim());
    let out = tvgam(&["evaluate", "--model", s(&model), "--input", s(&data), "--target", "y"]);
    assert_eq!(code(&out), 0);
    let eval = json(&stdout(&out));
    let a = eval["objective"].as_f64().unwrap();
    let b = fitted["objective"].as_f64().unwrap();
    assert!((a - b).abs() <= 1e-9 * (1.0 + b));
    assert_eq!(eval["m"], 4);
}

#[test]
fn complexity_single_point() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "one.csv", "a\n1\n");
    let args = ["complexity", "--input", s(&data), "--C", "1", "--draws", "50", "--seed", "3"];
    let out = tvgam(&args);
    assert_eq!(code(&out), 0);
    let report = json(&stdout(&out));
    assert_eq!(report["estimate"], 0.5);
    assert_eq!(report["std_error"], 0.0);
    assert_eq!(stdout(&tvgam(&args)), stdout(&out));
}

#[test]
fn complexity_synthetic_within_bound() {
    let out = tvgam(&["complexity", "--p", "8", "--m", "200", "--draws", "200", "--seed", "1", "--noise", "gaussian"]);
    assert_eq!(code(&out), 0);
    let r = json(&stdout(&out));
    assert!(r["slack"].as_f64().unwrap() >= -3.0 * r["std_error"].as_f64().unwrap());
}

#[test]
fn certify_reference_and_refusal() {
    let out = tvgam(&["certify", "--p", "1024", "--m", "10000", "--C", "1", "--rho", "1", "--c", "1", "--delta", "0.05"]);
    assert_eq!(code(&out), 0);
    let value = json(&stdout(&out))["value"].as_f64().unwrap();
    assert!((value - 0.086324).abs() < 1e-5);

    let out = tvgam(&["certify", "--p", "2", "--m", "10000", "--C", "1", "--rho", "1", "--c", "1", "--delta", "0.05"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("p >= 3"));

    let at = |delta: &str| {
        json(&stdout(&tvgam(&["certify", "--p", "50", "--m", "500", "--C", "2", "--loss", "hinge", "--clip", "2", "--delta", delta])))["value"]
            .as_f64()
            .unwrap()
    };
    assert!(at("0.5") < at("0.05"));
    // Unbounded loss without a declared range.
    assert_eq!(code(&tvgam(&["certify", "--p", "50", "--m", "500", "--C", "2", "--loss", "squared", "--delta", "0.1"])), 2);
}

#[test]
fn tightness_writes_json_and_csv() {
    let dir = TempDir::new().unwrap();
    let table = dir.path().join("t.csv");
    let args = ["tightness", "--p", "4", "--m", "32,64", "--draws", "100", "--seed", "5", "--out", s(&table)];
    let out = tvgam(&args);
    assert_eq!(code(&out), 0);
    let reports = json(&stdout(&out));
    assert_eq!(reports.as_array().unwrap().len(), 2);
    let csv = std::fs::read_to_string(&table).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.starts_with("p,m,draws,seed"));
    assert_eq!(stdout(&tvgam(&args)), stdout(&out));
}

#[test]
fn scaling_table() {
    let dir = TempDir::new().unwrap();
    let table = dir.path().join("s.csv");
    let out = tvgam(&["scaling", "--p", "1,4", "--m", "20", "--draws", "50", "--seed", "2", "--out", s(&table)]);
    assert_eq!(code(&out), 0);
    let csv = std::fs::read_to_string(&table).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 3);
    // No bound below two features.
    assert!(rows[1].ends_with(",,"));
}
