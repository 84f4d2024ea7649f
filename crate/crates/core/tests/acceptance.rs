//! One test per acceptance criterion. Each prints its verdict line on
//! stdout (uncaptured) and fails when the criterion does.

use std::io::Write;

use machcombust::runner::run_criterion;

fn check(id: &str) {
    let c = run_criterion(id).unwrap_or_else(|e| panic!("{id} could not run: {e}"));
    // straight to the stream so the line shows without --nocapture
    let _ = writeln!(std::io::stdout().lock(), "{c}");
    assert!(c.passed, "{c}");
}

#[test]
fn c01_operator_identities_and_orders() {
    check("C1");
}

#[test]
fn c02_elliptic_contracts() {
    check("C2");
}

#[test]
fn c03_maximum_principle() {
    check("C3");
}

#[test]
fn c04_conservation_and_decay() {
    check("C4");
}

#[test]
fn c05_constraint_residuals() {
    check("C5");
}

#[test]
fn c06_constant_density_reduction() {
    check("C6");
}

#[test]
fn c07_initial_data_round_trip() {
    check("C7");
}

#[test]
fn c08_manufactured_convergence() {
    check("C8");
}

#[test]
fn c09_fixed_point_contraction() {
    check("C9");
}

#[test]
fn c10_energy_ledger_and_gradient_growth() {
    check("C10");
}

#[test]
fn c11_space_time_monitor() {
    check("C11");
}

#[test]
fn c12_determinism_and_checkpointing() {
    check("C12");
}
