//! One test per acceptance criterion. Each prints a single PASS/FAIL line and
//! fails if any of its checks fail.

use entcast::verify::{self, CriterionReport, VerifyConfig};

fn assert_criterion(run: fn(&VerifyConfig) -> CriterionReport) {
    let report = run(&VerifyConfig::default());
    println!("{report}");
    for check in report.failures() {
        println!("    failed: {}: {}", check.name, check.detail);
    }
    assert!(report.passed(), "{report}");
}

#[test]
fn criterion_1_cloner_bridge() {
    assert_criterion(verify::criterion_1);
}

#[test]
fn criterion_2_broadcast_state_equivalence() {
    assert_criterion(verify::criterion_2);
}

#[test]
fn criterion_3_symmetric_point() {
    assert_criterion(verify::criterion_3);
}

#[test]
fn criterion_4_swap_limit() {
    assert_criterion(verify::criterion_4);
}

#[test]
fn criterion_5_separability_windows() {
    assert_criterion(verify::criterion_5);
}

#[test]
fn criterion_6_chsh_non_violation() {
    assert_criterion(verify::criterion_6);
}

#[test]
fn criterion_7_teleportation_usefulness() {
    assert_criterion(verify::criterion_7);
}

#[test]
fn criterion_8_telecloning_correctness() {
    assert_criterion(verify::criterion_8);
}

#[test]
fn criterion_9_resource_report() {
    assert_criterion(verify::criterion_9);
}
