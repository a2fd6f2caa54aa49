//! Report-level invariants of the batch driver: deterministic bodies,
//! cache round-trips, admissibility gating, and config validation.

use serde_json::json;
use twistaff_cli::{run, table_csv, ConfigError, Status, SuiteConfig};

fn config(value: serde_json::Value) -> SuiteConfig {
    serde_json::from_value(value).expect("config parses")
}

fn fold_config(suites: &[&str], cache_dir: Option<&std::path::Path>) -> SuiteConfig {
    config(json!({
        "algebra": ["A", 2],
        "aut_kind": "diagram",
        "level": 4,
        "lambda": [0],
        "mu_list": [[0], [1, 0]],
        "s": 1,
        "points": "formal",
        "cutoffs": {
            "wedge_energy": 2,
            "h_energy": 3,
            "monomial_degree": 6,
            "series_degree": 10
        },
        "suites": suites,
        "parallelism": 2,
        "cache_dir": cache_dir
    }))
}

#[test]
fn identical_configs_give_identical_bodies() {
    let cfg = fold_config(&["casimir", "pairing", "eta"], None);
    let a = run(&cfg, Some(2)).unwrap();
    let b = run(&cfg, Some(1)).unwrap();
    assert!(!a.any_fail());
    assert_eq!(a.body_json(), b.body_json());
    // order matches the requested suite order
    let ids: Vec<&str> = a.records.iter().map(|r| r.id.as_str()).collect();
    assert_eq!(
        ids,
        ["casimir/p=1", "casimir/p=2", "casimir/p=3", "casimir/p=4",
         "pairing/identity", "eta/coefficient-identities"]
    );
    // every record carries a nonempty anchor
    assert!(a.records.iter().all(|r| !r.paper_ref.is_empty()));
}

#[test]
fn warm_cache_reproduces_cold_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fold_config(&["nakano"], Some(dir.path()));
    let cold = run(&cfg, Some(1)).unwrap();
    assert!(!cold.any_fail());
    assert!(
        std::fs::read_dir(dir.path()).unwrap().count() > 0,
        "the module cache should be populated"
    );
    let warm = run(&cfg, Some(1)).unwrap();
    assert_eq!(cold.body_json(), warm.body_json());
}

#[test]
fn empty_suite_list_gives_empty_report() {
    let cfg = fold_config(&[], None);
    let rep = run(&cfg, Some(1)).unwrap();
    assert!(rep.records.is_empty());
    assert!(!rep.any_fail());
}

#[test]
fn cohomology_demands_trivial_evaluation_weights() {
    let cfg = fold_config(&["cohomology"], None);
    match run(&cfg, Some(1)) {
        Err(ConfigError::Invalid(msg)) => assert!(msg.contains("trivial")),
        other => panic!("expected an invalid-config error, got {other:?}"),
    }
}

#[test]
fn inadmissible_weight_fails_with_diagnostic() {
    let mut cfg = fold_config(&["nakano"], None);
    cfg.level = 3; // the affine-node pairing of the trivial weight is 3/2
    let rep = run(&cfg, Some(1)).unwrap();
    assert!(rep.any_fail());
    let rec = &rep.records[0];
    assert_eq!(rec.status, Status::Fail);
    assert!(rec.details.contains("3/2"), "diagnostic pairing value: {}", rec.details);
}

#[test]
fn unknown_suite_is_a_config_error() {
    let cfg = fold_config(&["spectra"], None);
    assert!(matches!(run(&cfg, Some(1)), Err(ConfigError::Invalid(_))));
}

#[test]
fn triality_vanishing_suite_is_skipped_but_casimir_runs() {
    let cfg = config(json!({
        "algebra": ["D", 4],
        "aut_kind": "triality",
        "level": 3,
        "lambda": [0, 0],
        "cutoffs": {
            "wedge_energy": 2,
            "h_energy": 2,
            "monomial_degree": 4,
            "series_degree": 8
        },
        "suites": ["casimir", "cohomology"]
    }));
    let rep = run(&cfg, Some(1)).unwrap();
    assert!(!rep.any_fail());
    assert!(rep
        .records
        .iter()
        .any(|r| r.id.starts_with("casimir/") && r.status == Status::Pass));
    let coh = rep.records.iter().find(|r| r.id.starts_with("cohomology")).unwrap();
    assert_eq!(coh.status, Status::ReportOnly);
    // the order-three scalar at p = 1
    let p1 = rep.records.iter().find(|r| r.id == "casimir/p=1").unwrap();
    assert!(p1.details.contains("by 4"), "{}", p1.details);
}

#[test]
fn fixpoint_table_lists_expected_rows() {
    let csv = table_csv("fixpoints", false).unwrap();
    assert!(csv.contains("A2,2,B1"));
    assert!(csv.contains("D4,3,G2"));
    assert!(!csv.contains("E6"), "slow tier must be opt-in");
    let slow = table_csv("fixpoints", true).unwrap();
    assert!(slow.contains("E6,2,F4"));
}

#[test]
fn dmu_table_has_scale_column() {
    let csv = table_csv("dmu", false).unwrap();
    // the order-two fold of A2: 2 hcheck / m = 3
    assert!(csv.lines().any(|l| l.starts_with("A2,2,1,3")), "{csv}");
    // untwisted-style sanity on the order-two fold of A3: d_0 = 2 hcheck / m
    assert!(csv.lines().any(|l| l.starts_with("A3,2,4,4")), "{csv}");
    assert!(table_csv("nope", false).is_err());
}
