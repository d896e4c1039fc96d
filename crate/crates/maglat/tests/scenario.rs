use maglat::scenario::*;
use maglat::Error;

fn run(text: &str) -> maglat::Result<RunOutcome> {
    run_config(parse_scenario(text, false)?, &RunOptions::default())
}

#[test]
fn empty_analysis_list_echoes_inputs() {
    let out = run(r#"{
        "schema_version": 1,
        "name": "inputs only",
        "material": {"name": "InAs", "g_factor": -14.9, "eff_mass": 0.023},
        "drive": {"rabi": "100 ueV", "delta": "250 ueV", "omega": "22 GHz_f", "a": "900 nm"},
        "environment": {"temperature": "10 mK"}
    }"#)
    .unwrap();
    assert!(out.report.results.is_empty());
    assert!(out.report.checks.is_empty() && out.report.passed);
    assert_eq!(out.exit_code(), 0);
    let inputs = serde_json::to_value(&out.report.inputs).unwrap();
    let rabi = inputs["drive"]["rabi"].as_f64().unwrap();
    assert!((maglat::units::to_uev(rabi) - 100.0).abs() < 1e-9);
    assert_eq!(inputs["material"]["eff_mass"], 0.023);
}

#[test]
fn insb_case_study_scenario() {
    let out = run(r#"{"schema_version": 1, "analyses": [{"kind": "case_study", "name": "insb_heavy_hole"}]}"#).unwrap();
    let cs = &out.report.results["case_study"];
    let get = |q: &str| {
        cs["checks"].as_array().unwrap().iter().find(|c| c["quantity"] == q).unwrap_or_else(|| panic!("{q}"))["value"]
            .as_f64()
            .unwrap()
    };
    assert!((get("v0_uev") / 90.0 - 1.0).abs() < 0.05);
    assert!((get("e_r_uev") / 60.0 - 1.0).abs() < 0.05);
    assert!((get("t_c_uev") / 18.0 - 1.0).abs() < 0.35);
    assert_eq!(out.exit_code(), 0);
}

#[test]
fn malformed_unit_names_the_key() {
    let e = run(r#"{
        "schema_version": 1,
        "material": {"name": "x", "g_factor": 2, "eff_mass": 0.1},
        "drive": {"rabi": "100 ueV", "delta": "250 furlongs", "omega": "22 GHz_f", "a": "900 nm"}
    }"#)
    .unwrap_err();
    assert_eq!(e.exit_code(), 1);
    match e {
        Error::Config { key, .. } => assert_eq!(key, "drive.delta"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn strict_mode_rejects_unknown_keys() {
    let text = r#"{"schema_version": 1, "analyses": [], "colour": "blue"}"#;
    let lax = parse_scenario(text, false).unwrap();
    assert_eq!(lax.unknown_keys, vec!["colour".to_string()]);
    match parse_scenario(text, true).unwrap_err() {
        Error::Config { key, .. } => assert_eq!(key, "colour"),
        other => panic!("{other:?}"),
    }
    let nested = r#"{"schema_version": 1, "material": {"name": "x", "g_factor": 2, "eff_mass": 0.1, "spin": 3}}"#;
    assert!(parse_scenario(nested, true).is_err());
}

#[test]
fn schema_version_is_checked() {
    let e = parse_scenario(r#"{"schema_version": 2}"#, false).unwrap_err();
    assert!(matches!(e, Error::Config { ref key, .. } if key == "schema_version"));
    assert!(parse_scenario(r#"{"name": "no version"}"#, false).is_err());
    assert!(parse_scenario("{", false).is_err());
}

#[test]
fn failed_expectation_exits_with_three() {
    let out = run(r#"{
        "schema_version": 1,
        "analyses": [{"kind": "table1"}],
        "expectations": [{"quantity": "/table1/cells/2/rabi_uev/0", "value": 100.0, "tolerance": {"kind": "relative", "rel": 0.05}}]
    }"#)
    .unwrap();
    assert_eq!(out.exit_code(), 3);
    assert!(!out.report.passed);
}

#[test]
fn non_convergence_exits_with_two() {
    // a harmonic budget too small for the potential
    let e = run(r#"{
        "schema_version": 1,
        "material": {"name": "InAs", "g_factor": -14.9, "eff_mass": 0.023},
        "drive": {"rabi": "2000 ueV", "delta": "1 ueV", "omega": "22 GHz_f", "a": "900 nm"},
        "analyses": [{"kind": "bands", "n_q": 8, "potential": {"kind": "adiabatic", "sublattice": "plus"}}]
    }"#)
    .unwrap_err();
    assert_eq!(e.exit_code(), 2, "{e}");
}

#[test]
fn identical_inputs_give_identical_files() {
    let text = r#"{
        "schema_version": 1,
        "seed": 5,
        "analyses": [
            {"kind": "table1"},
            {"kind": "stability_diagram", "q": {"min": 0.1, "max": 1.0, "n": 6}, "r": {"min": 0.0, "max": 0.4, "n": 3}, "eta": 0.1},
            {"kind": "floquet_compare", "n_periods": 2}
        ]
    }"#;
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let opts = RunOptions { out_dir: Some(d.path().to_path_buf()), ..RunOptions::default() };
        run_config(parse_scenario(text, true).unwrap(), &opts).unwrap();
    }
    let mut names: Vec<_> = std::fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 4);
    for n in names {
        assert_eq!(std::fs::read(a.path().join(&n)).unwrap(), std::fs::read(b.path().join(&n)).unwrap(), "{n:?}");
    }
}

#[test]
fn csv_tables_carry_units_and_lf_endings() {
    let out = run(r#"{"schema_version": 1, "analyses": [{"kind": "table1"}]}"#).unwrap();
    let csv = out.tables[0].to_csv();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# units: material=-"));
    assert!(lines.next().unwrap().starts_with("material,"));
    assert!(!csv.contains('\r'));
    assert_eq!(csv.lines().count(), 14);
}

#[test]
fn table1_matches_golden_file() {
    let out = run(r#"{"schema_version": 1, "analyses": [{"kind": "table1"}]}"#).unwrap();
    let golden = include_str!("data/table1.csv");
    assert_eq!(out.tables[0].to_csv(), golden);
}

#[test]
fn table1_overrides_scale_linearly() {
    let base = run(r#"{"schema_version": 1, "analyses": [{"kind": "table1"}]}"#).unwrap();
    let doubled = run(
        r#"{"schema_version": 1, "analyses": [{"kind": "table1", "wire": ["20 mT", "100 mT"], "saw": ["100 mT", "200 mT"]}]}"#,
    )
    .unwrap();
    let cells = |o: &RunOutcome| o.report.results["table1"]["cells"].as_array().unwrap().clone();
    for (a, b) in cells(&base).iter().zip(&cells(&doubled)) {
        for k in 0..2 {
            let (x, y) = (a["rabi_uev"][k].as_f64().unwrap(), b["rabi_uev"][k].as_f64().unwrap());
            assert!((y / x - 2.0).abs() < 1e-12);
        }
    }
}

#[test]
fn repeated_analyses_get_distinct_ids() {
    let out = run(r#"{"schema_version": 1, "analyses": [{"kind": "table1"}, {"kind": "table1"}]}"#).unwrap();
    assert!(out.report.results.contains_key("table1") && out.report.results.contains_key("table1_2"));
}

#[test]
fn fuzz_seeds_parse_without_panicking() {
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus");
    let mut seen = 0;
    for entry in std::fs::read_dir(root.join("scenario_json")).unwrap() {
        let text = std::fs::read_to_string(entry.unwrap().path()).unwrap();
        if let Ok(l) = parse_scenario(&text, false) {
            let _ = resolve(&l.config);
        }
        seen += 1;
    }
    for entry in std::fs::read_dir(root.join("quantity")).unwrap() {
        let text = std::fs::read_to_string(entry.unwrap().path()).unwrap();
        let _ = maglat::units::parse_quantity(&text, maglat::units::Dimension::Energy, maglat::units::FreqConvention::Angular);
        seen += 1;
    }
    assert!(seen >= 20);
}

#[test]
fn full_seed_scenario_runs() {
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus/scenario_json/full.json");
    let out = run(&std::fs::read_to_string(root).unwrap()).unwrap();
    assert_eq!(out.exit_code(), 0, "{:?}", out.mismatch);
    assert_eq!(out.report.results.len(), 4);
}
