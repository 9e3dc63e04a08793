use sada_core::oracles::{registry, run_oracle_suite};

#[test]
fn every_registered_oracle_passes() {
    let report = run_oracle_suite("");
    println!("{report}");
    assert_eq!(report.cases.len(), registry().len());
    assert!(report.passed(), "{report}");
}

