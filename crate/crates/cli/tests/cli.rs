use std::fs;
use std::process::{Command, Output};

fn grac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_grac"))
        .args(args)
        .output()
        .expect("run grac")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn classical_full_set_prints_exact_optimum() {
    let o = grac(&["classical", "--n", "3", "--labels", "all"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("37/56"));
}

#[test]
fn classical_writes_strategies_atomically() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("strategies.json");
    let o = grac(&[
        "classical",
        "--labels",
        "all",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("37/56"));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["exact"], "37/56");
    assert_eq!(v["strategies"].as_array().unwrap().len(), 16);
    let leftovers = fs::read_dir(dir.path()).unwrap().count();
    assert_eq!(leftovers, 1);
}

#[test]
fn quantum_pair_reaches_its_bound() {
    let o = grac(&["quantum", "--n", "3", "--labels", "100,010", "--seed", "7"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("0.853553"));
}

#[test]
fn mubs_check_reports_true() {
    let o = grac(&["mubs", "--n", "3", "--check", "100,010,110"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("MUBS: true"));
}

#[test]
fn depolarizing_threshold_for_pair() {
    let o = grac(&["noise", "--labels", "k=2", "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["lambda_crit"].as_f64().unwrap() - 0.29289).abs() < 1e-4);
}

#[test]
fn dephasing_sweep_csv_has_header_and_rows() {
    let o = grac(&[
        "noise",
        "--channel",
        "dephasing",
        "--sweep",
        "--labels",
        "k=4:open",
        "--points",
        "11",
        "--format",
        "csv",
    ]);
    assert!(o.status.success());
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(
        lines.next().unwrap(),
        "lambda,one_minus_lambda,quantum_value,classical_value,ratio"
    );
    assert_eq!(lines.count(), 11);
}

#[test]
fn dephasing_window_json() {
    let o = grac(&[
        "noise",
        "--channel",
        "dephasing",
        "--labels",
        "100,010,001,110,101",
        "--against",
        "100,010,001,110",
        "--format",
        "json",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["low"].as_f64().unwrap() - 0.5).abs() < 0.01);
    assert!((v["high"].as_f64().unwrap() - 0.871).abs() < 0.01);
}

#[test]
fn eacc_pair_reaches_its_bound() {
    let o = grac(&["eacc", "--labels", "k=2", "--dim", "2", "--restarts", "8"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("0.853553"));
}

#[test]
fn classical_tables_pass() {
    let o = grac(&["tables", "--table", "I,II", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(!stdout(&o).contains(",false\n"));
}

#[test]
fn tables_exit_two_on_tolerance_failure() {
    let o = grac(&[
        "tables",
        "--table",
        "IV",
        "--open-dim",
        "2",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let failed: Vec<_> = v[0]["rows"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["within"] == false)
        .collect();
    assert_eq!(failed.len(), 1);
}

#[test]
fn module_errors_exit_one_with_json() {
    for args in [
        &["quantum", "--labels", "100,2"][..],
        &["classical", "--n", "5"],
        &["eacc", "--dim", "9"],
        &["nonsense"],
    ] {
        let o = grac(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        let v: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
        assert!(v["error"].is_string());
    }
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut contents = Vec::new();
    for name in ["a.json", "b.json"] {
        let path = dir.path().join(name);
        let o = grac(&[
            "quantum",
            "--labels",
            "all",
            "--seed",
            "3",
            "--format",
            "json",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        contents.push(fs::read(&path).unwrap());
    }
    assert_eq!(contents[0], contents[1]);
}
