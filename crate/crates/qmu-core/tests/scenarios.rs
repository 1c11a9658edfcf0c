use std::collections::BTreeMap;

use qmu_core::error::QmuError;
use qmu_core::scenarios::{
    list_scenarios, parse_overrides, run_scenario, run_suite, sweep, write_sweep_csv, RunConfig,
};

fn quick() -> RunConfig {
    RunConfig {
        budget: 400,
        ..RunConfig::default()
    }
}

#[test]
fn bundled_scenarios_pass_with_defaults() {
    for s in list_scenarios() {
        let r = run_scenario(s.name, &BTreeMap::new(), &quick()).unwrap();
        assert!(r.passed, "{}", r.table());
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["schema"], "qmu/1");
        assert_eq!(v["scenario"], s.name);
    }
}

#[test]
fn husimi_product_is_one_half() {
    let r = run_scenario("husimi-saturation", &BTreeMap::new(), &RunConfig::default()).unwrap();
    let e = r.expectations.iter().find(|e| e.name == "std_product").unwrap();
    assert!((e.observed - 0.5).abs() <= 1e-4);
}

#[test]
fn overrides_change_parameters() {
    let o = parse_overrides(&["theta=0.3", "sigma_theta=0.3"]).unwrap();
    let r = run_scenario("identity-scheme", &o, &quick()).unwrap();
    assert_eq!(r.parameters["theta"], 0.3);
    assert!(r.passed, "{}", r.table());
}

#[test]
fn nonfinite_override_rejected() {
    let mut o = BTreeMap::new();
    o.insert("theta".to_string(), f64::NAN);
    assert!(matches!(
        run_scenario("identity-scheme", &o, &quick()),
        Err(QmuError::Parse(_))
    ));
}

#[test]
fn sweep_csv_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    let rows = sweep("phase-space", 0.5, 2.0, 4, &RunConfig::default()).unwrap();
    write_sweep_csv(&rows, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(rows.iter().all(|r| r.holds));
    let bad = dir.path().join("missing").join("s.csv");
    assert!(matches!(write_sweep_csv(&rows, &bad), Err(QmuError::Io(_))));
}

#[test]
fn suites_depend_on_seed_only() {
    let a = run_suite("eps-sum", &quick()).unwrap();
    let b = run_suite("eps-sum", &RunConfig { seed: 9, ..quick() }).unwrap();
    assert!(a.passed && b.passed);
    assert_ne!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
}
