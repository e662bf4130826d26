use std::path::Path;
use std::process::{Command, Output};

use disperse::harness::{ExperimentConfig, ExperimentKind};

fn disperse(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_disperse"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn exponents_writes_verdict_and_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = disperse(&["exponents"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS exponents"));

    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("exponents.json")).unwrap())
            .unwrap();
    assert_eq!(json["experiment"], "exponents");
    assert_eq!(json["pass"], true);
    let table = std::fs::read_to_string(dir.path().join("exponents_table.csv")).unwrap();
    assert_eq!(table.lines().next(), Some("p,q,n,alpha,beta,p_star,kappa,nu"));
}

#[test]
fn tensor_runs_from_a_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::builtin(ExperimentKind::Tensor);
    let path = dir.path().join("tensor.json");
    std::fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();

    let o = disperse(&["tensor", "--config", path.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(dir.path().join("tensor.json").exists());
    assert!(dir.path().join("tensor_table.csv").exists());
}

#[test]
fn malformed_config_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"flux_k": [1], "unknown_field": 3}"#).unwrap();
    let o = disperse(&["solve", "--config", path.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));

    let o = disperse(&["solve", "--config", "/nonexistent/cfg.json"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn failed_audit_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::builtin(ExperimentKind::Fundamental);
    cfg.analysis.l1_tolerance = 1e-9;
    let path = dir.path().join("strict.json");
    std::fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();

    let o = disperse(&["fundamental", "--config", path.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
    assert!(stdout(&o).contains("FAIL fundamental: L1 error at the finest level"));
    let json: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("fundamental.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(json["pass"], false);
}

#[test]
fn solve_writes_snapshots_on_request() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::builtin(ExperimentKind::Solve);
    cfg.cells = vec![200];
    cfg.spacing = vec![0.05];
    cfg.origin = vec![-3.0];
    cfg.t_end = 2.0;
    cfg.record_times = vec![0.0, 1.0, 2.0];
    let path = dir.path().join("solve.json");
    std::fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();

    let o = disperse(
        &["solve", "--config", path.to_str().unwrap(), "--snapshots", "--jobs", "2"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    for i in 0..3 {
        let snap = dir.path().join(format!("solve_snapshot_{i:03}.csv"));
        let (field, _) = disperse::io::field_from_csv(&std::fs::read_to_string(snap).unwrap()).unwrap();
        assert_eq!(field.grid().cells(), &[200]);
    }
    assert!(dir.path().join("solve_series.csv").exists());
}
