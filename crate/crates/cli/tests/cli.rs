use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_monoweight")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn constants_table() {
    let o = run(&["constants", "--A", "1,1", "--p-grid", "1.5,2"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["D"], 4.0);
    assert_eq!(v["k"], 2);
    assert!((v["ball_measure"].as_f64().unwrap() - 0.125).abs() < 1e-15);
    assert!((v["c1"].as_f64().unwrap() - 4.0 * 8f64.powf(-0.25)).abs() < 1e-14);
    assert!((v["exponents"][1]["p_star"].as_f64().unwrap() - 4.0).abs() < 1e-15);
    assert!(v["trudinger"]["c2"].as_f64().unwrap().is_finite());
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["constants", "--A", "-1,1"][..],
        &["verify-sobolev", "--A", "1,1", "--p", "5"],
        &["verify-sobolev", "--A", "1,1"],
        &["verify-morrey", "--A", "1,1", "--p", "3"],
        &["verify-isop"],
        &["verify-isop", "--A", "1", "--corpus", "/nonexistent/shapes.jsonl"],
        &["solve-neumann", "--A", "1,1,1"],
        &["solve-neumann", "--A", "1,1", "--domain", r#"{"kind":"disk","params":{"center":[0.5,2],"radius":1}}"#],
        &["no-such-command"],
        &["verify-isop", "--A", "1,1", "--tol", "-1"],
    ] {
        let o = run(args);
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn failed_check_exits_one_and_names_the_report() {
    // a one-function calibration corpus gives an envelope too tight for another draw
    let o = run(&["verify-morrey", "--A", "1,1", "--p", "6", "--count", "1", "--seed", "0"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAILED morrey-0000"));
}

#[test]
fn csv_reports_and_summary_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display().to_string();
    let o = run(&["verify-isop", "--A", "0.5,2.3", "--count", "12", "--seed", "2", "--format", "csv", "--out", &out]);
    assert_eq!(code(&o), 0);
    let mut rdr = csv::Reader::from_path(dir.path().join("reports.csv")).unwrap();
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["id", "inequality", "lhs", "rhs", "constant", "margin", "pass", "meta", "config"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 12);
    assert_eq!(&rows[3][0], "isop-0003");
    let cfg: Value = serde_json::from_str(&rows[0][8]).unwrap();
    assert_eq!(cfg["A"], serde_json::json!([0.5, 2.3]));
    assert_eq!(cfg["seed"], 2);
    let summary = read_json(&dir.path().join("summary.json"));
    assert_eq!((summary["total"].as_u64(), summary["failed"].as_u64()), (Some(12), Some(0)));
    assert_eq!(summary["worst_margins"].as_array().unwrap().len(), 5);
    // the summary also goes to stdout
    let printed: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(printed, summary);
}

#[test]
fn jsonl_reports_without_out_go_to_stdout() {
    let o = run(&["verify-sobolev", "--A", "1,0", "--p-grid", "1,2", "--count", "3"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<Value> = text.lines().take(6).map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines[0]["id"], "sobolev-p1-0000");
    assert_eq!(lines[5]["id"], "sobolev-p2-0002");
    assert!(lines.iter().all(|l| l["pass"] == true && l["report"]["inequality"] == "sobolev"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"command": "verify-isop", "A": [1, 0], "count": 30, "seed": 4}"#).unwrap();
    let o = run(&["verify-isop", "--config", cfg.to_str().unwrap(), "--count", "7"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let first: Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(first["config"]["count"], 7);
    assert_eq!(first["config"]["seed"], 4);
    assert_eq!(text.lines().filter(|l| l.starts_with(r#"{"id""#)).count(), 7);
    let o = run(&["verify-sobolev", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn neumann_writes_domain_and_solution() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display().to_string();
    let domain = r#"{"kind":"disk","params":{"center":[1.5,1.5],"radius":0.8}}"#;
    let o = run(&["solve-neumann", "--A", "1,1", "--h", "0.05", "--domain", domain, "--out", &out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let d = read_json(&dir.path().join("neumann/neumann-00-domain.json"));
    let (nx, ny) = (d["nx"].as_u64().unwrap() as usize, d["ny"].as_u64().unwrap() as usize);
    let runs: Vec<usize> = d["mask_rle"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap() as usize).collect();
    assert_eq!(runs.iter().sum::<usize>(), nx * ny);
    let active: usize = runs.iter().skip(1).step_by(2).sum();
    let u = std::fs::read_to_string(dir.path().join("neumann/neumann-00-u.csv")).unwrap();
    assert_eq!(u.lines().count(), ny);
    let filled = u.lines().flat_map(|l| l.split(',')).filter(|c| !c.is_empty()).count();
    assert_eq!(filled, active);
    let reports = std::fs::read_to_string(dir.path().join("reports.jsonl")).unwrap();
    let ids: Vec<String> = reports
        .lines()
        .map(|l| serde_json::from_str::<Value>(l).unwrap()["id"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(ids, ["ball-certificate", "neumann-00"]);
}

#[test]
fn side_files_for_profiles_and_traces() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display().to_string();
    assert_eq!(code(&run(&["rearrange", "--A", "1,1", "--count", "1", "--out", &out])), 0);
    let profile = std::fs::read_to_string(dir.path().join("profiles/rearrange-0000.csv")).unwrap();
    assert!(profile.lines().count() > 10);
    assert_eq!(code(&run(&["shape-search", "--A", "1,1", "--count", "1", "--steps", "5", "--out", &out])), 0);
    let trace = std::fs::read_to_string(dir.path().join("traces/shape-search-0000.csv")).unwrap();
    assert!(trace.starts_with("step,quotient\n"));
}

#[test]
fn worker_count_does_not_change_reports() {
    let strip = |o: &Output| -> Vec<Value> {
        String::from_utf8_lossy(&o.stdout)
            .lines()
            .filter(|l| l.starts_with(r#"{"id""#))
            .map(|l| serde_json::from_str::<Value>(l).unwrap()["report"].clone())
            .collect()
    };
    let base = ["cov-verify", "--alpha", "0.5,0.5", "--count", "4", "--seed", "1"];
    let one = run(&[&base[..], &["--workers", "1"]].concat());
    let three = run(&[&base[..], &["--workers", "3"]].concat());
    assert_eq!(code(&one), 0);
    assert_eq!(strip(&one), strip(&three));
    assert_eq!(strip(&one).len(), 4);
}
