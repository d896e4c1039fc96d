use std::process::{Command, Output};

fn maglat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maglat")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn table1_prints_csv() {
    let o = maglat(&["table1"]);
    assert_eq!(code(&o), 0);
    let s = String::from_utf8(o.stdout).unwrap();
    assert!(s.starts_with("# units:"));
    assert!(s.contains("\nInAs,wire,"));
}

#[test]
fn strict_table1_flags_the_gaas_cell() {
    let o = maglat(&["--strict", "table1"]);
    assert_eq!(code(&o), 3);
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "mismatch");
    assert!(err["error"]["message"].as_str().unwrap().contains("GaAs wire"));
}

#[test]
fn case_studies_pass() {
    for name in ["inas_electron", "inas_heavy_hole", "insb_heavy_hole"] {
        let o = maglat(&["case-study", name, "--format", "json"]);
        assert_eq!(code(&o), 0, "{name}: {}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(code(&maglat(&["case-study", "gaas_electron"])), 1);
}

#[test]
fn malformed_unit_exits_with_one_and_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let o = maglat(&[
        "--out",
        dir.path().to_str().unwrap(),
        "trap-check",
        "--g",
        "-14.9",
        "--mass",
        "0.023",
        "--rabi",
        "100 ueV",
        "--delta",
        "250 ueV",
        "--omega",
        "22 GHz_f",
        "--a",
        "900 nanometres",
    ]);
    assert_eq!(code(&o), 1);
    let err: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("error.json")).unwrap()).unwrap();
    assert_eq!(err["error"]["key"], "drive.a");
    assert_eq!(err["error"]["exit_code"], 1);
}

#[test]
fn scenario_run_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    std::fs::write(
        &path,
        r#"{"schema_version": 1, "name": "t", "analyses": [{"kind": "floquet_compare", "n_periods": 2}]}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = maglat(&["--out", out.to_str().unwrap(), "run", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["name"], "t");
    assert_eq!(report["results"]["floquet_compare"].as_array().unwrap().len(), 6);
    assert!(out.join("floquet_compare.csv").exists());
}

#[test]
fn strict_run_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    std::fs::write(&path, r#"{"schema_version": 1, "analysis": []}"#).unwrap();
    assert_eq!(code(&maglat(&["run", path.to_str().unwrap()])), 0);
    let o = maglat(&["--strict", "run", path.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"]["key"], "analysis");
}

#[test]
fn output_does_not_depend_on_thread_count() {
    let args = ["stability-diagram", "--nq", "9", "--nr", "4"];
    let one = Command::new(env!("CARGO_BIN_EXE_maglat")).args(args).env("MAGLAT_THREADS", "1").output().unwrap();
    let four = maglat(&[&args[..], &["--threads", "4"]].concat());
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, four.stdout);
    assert!(!one.stdout.is_empty());
}

#[test]
fn seeded_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = maglat(&["--seed", "3", "--out", d.path().to_str().unwrap(), "--format", "csv", "hopping-sweep", "--n-sites", "6"]);
        assert_eq!(code(&o), 0);
    }
    for f in ["report.json", "hopping_sweep.csv"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}
