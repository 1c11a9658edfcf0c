use std::collections::BTreeMap;

use qmu::{check_json, error_bound, scenario_json, scenario_names, wasserstein};

#[test]
fn point_vs_two_point() {
    let (w, lp) = wasserstein(vec![0.0], vec![1.0], vec![0.0, 2.0], vec![0.5, 0.5], true).unwrap();
    assert!((w - 2f64.sqrt()).abs() < 1e-12);
    assert!((lp.unwrap() - w).abs() < 1e-9);
}

#[test]
fn bad_distribution_is_an_error() {
    assert!(wasserstein(vec![0.0], vec![0.5], vec![1.0], vec![1.0], false).is_err());
}

#[test]
fn scenario_round_trip() {
    assert!(scenario_names().iter().any(|n| n == "husimi-saturation"));
    let json = scenario_json("example8-unbiased-zero", BTreeMap::new(), 0).unwrap();
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["schema"], "qmu/1");
    assert_eq!(v["passed"], true);
    assert!(scenario_json("missing", BTreeMap::new(), 0).is_err());
}

#[test]
fn check_and_bound() {
    let v: serde_json::Value = serde_json::from_str(&check_json("ozawa", 3, 100).unwrap()).unwrap();
    assert_eq!(v["violations"], 0);
    let (bound, found) = error_bound([0.0, 0.0, 1.0], [1.0, 0.0, 0.0]).unwrap();
    assert!((bound - (4.0 - 2.0 * 2f64.sqrt())).abs() < 1e-12);
    assert!((found - bound).abs() < 1e-4);
}
