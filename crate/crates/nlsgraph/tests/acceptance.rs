//! Acceptance suite: one test per criterion, printing the measured line for
//! every sub-check. Run with `cargo test --test acceptance -- --nocapture`
//! to see the numbers; the `selftest` CLI subcommand prints the same report.

use nlsgraph::selftest;

fn assert_criterion(outcome: selftest::CriterionOutcome) {
    println!("{}", outcome.summary_line());
    for d in &outcome.details {
        println!("    {d}");
    }
    assert!(outcome.passed, "{} failed:\n{}", outcome.summary_line(), outcome.details.join("\n"));
}

#[test]
fn c01_soliton_mass() {
    assert_criterion(selftest::criterion_1());
}

#[test]
fn c02_soliton_zero_energy() {
    assert_criterion(selftest::criterion_2());
}

#[test]
fn c03_gn_constants() {
    assert_criterion(selftest::criterion_3());
}

#[test]
fn c04_gradient_correctness() {
    assert_criterion(selftest::criterion_4());
}

#[test]
fn c05_topology_classification() {
    assert_criterion(selftest::criterion_5());
}

#[test]
fn c06_tadpole_existence_window() {
    assert_criterion(selftest::criterion_6());
}

#[test]
fn c07_unboundedness_detection() {
    assert_criterion(selftest::criterion_7());
}

#[test]
fn c08_bridge_doubling() {
    assert_criterion(selftest::criterion_8());
}

#[test]
fn c09_signpost_hypothesis() {
    assert_criterion(selftest::criterion_9());
}

#[test]
fn c10_rearrangement_properties() {
    assert_criterion(selftest::criterion_10());
}

#[test]
fn c11_modified_gn_pipeline() {
    assert_criterion(selftest::criterion_11());
}

#[test]
fn c12_energy_sandwich() {
    assert_criterion(selftest::criterion_12());
}
