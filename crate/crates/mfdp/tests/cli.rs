use std::path::Path;
use std::process::{Command, Output};

fn mfdp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mfdp")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn analyze_marks_unreachable_hypotheses_infinite() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "p.csv", "p\n0.001\n0.002\n0.003\n0.9\n");
    let out_dir = dir.path().join("out");
    let out = mfdp(&["analyze", &input, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let adjusted = std::fs::read_to_string(out_dir.join("adjusted.csv")).unwrap();
    let rows: Vec<&str> = adjusted.lines().collect();
    assert_eq!(rows[0], "index,p_value,adjusted");
    assert_eq!(rows.len(), 5);
    assert!(rows[4].starts_with("4,") && rows[4].ends_with(",Inf"), "{}", rows[4]);
    for row in &rows[1..4] {
        assert!(!row.ends_with("Inf"), "{row}");
    }
    for name in ["summary.csv", "envelope.csv"] {
        assert!(out_dir.join(name).exists(), "{name}");
    }
}

#[test]
fn analyze_json_is_parseable() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "p.csv", "0.001\n0.002\n0.003\n0.9\n");
    let out = mfdp(&["analyze", &input, "--json", "--gamma", "0.05,0.5"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["adjusted"][3]["adjusted"], "Inf");
    assert_eq!(doc["c"], 0.125);
    assert_eq!(doc["summary"].as_array().unwrap().len(), 2);
}

#[test]
fn storey_estimate_reports_raw_and_clamped() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "p.csv", "p\n0.1\n0.2\n0.9\n1.0\n");
    let out = mfdp(&["estimate", &input, "--lambda", "0.8"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "storey");
    // 1 - 0.8 is not exact in binary, so the raw value lands just above 2.5
    let raw: f64 = row[2].parse().unwrap();
    assert!((raw - 2.5).abs() < 1e-12, "{raw}");
    assert_eq!(row[3], "1");
}

#[test]
fn both_estimators_agree_at_one_half() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "p.csv", "p\n0.4\n0.6\n");
    let out = mfdp(&["estimate", &input, "--method", "both"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let raws: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(raws, ["1", "1"]);
}

#[test]
fn simulate_is_deterministic() {
    let args = ["simulate", "--scenario", "in", "--pi0", "1", "--reps", "200", "--seed", "7"];
    let first = mfdp(&args);
    let second = mfdp(&args);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    assert!(!first.stdout.is_empty());
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn validation_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "p.csv", "p\n0.1\n0.2\n");
    let out = mfdp(&["analyze", &input, "--gamma", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gamma"));

    let bad = write(dir.path(), "bad.csv", "p\n0.1\nabc\n0.3\n");
    let out = mfdp(&["analyze", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    let out_of_range = write(dir.path(), "range.csv", "p\n0.1\n1.2\n");
    assert_eq!(mfdp(&["analyze", &out_of_range]).status.code(), Some(2));
}

#[test]
fn missing_input_exits_with_three() {
    let out = mfdp(&["analyze", "/definitely/not/here.csv"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn envelope_subcommand_writes_curve() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "p.csv", "p\n0.001\n0.02\n0.05\n0.5\n");
    let out = mfdp(&["envelope", &input]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("t,R,B_tilde,B_tilde_prime,fdp_bound"), "{text}");
}

#[test]
fn verify_equivalence_reports_no_mismatch() {
    let out = mfdp(&["verify-equivalence", "--instances", "20", "--json"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["instances"], 20);
    assert!(doc["mismatches"].as_array().unwrap().is_empty());
}
