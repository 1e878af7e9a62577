//! The verification gate: one test per acceptance check, each printing its
//! PASS/FAIL line with the measured value against the pinned threshold.
//!
//! Run with `cargo test -p sfw-core --test acceptance -- --nocapture` to see
//! every line; the same checks back the CLI's `verify` command.

use sfw_core::acceptance::{self as acc, CriterionReport};

fn check(report: CriterionReport) {
    println!("{}", report.line());
    assert!(report.passed, "{}", report.line());
}

#[test]
fn hessian_estimator_unbiased() {
    check(acc::hessian_estimator_unbiased());
}

#[test]
fn gradient_variation_unbiased() {
    check(acc::gradient_variation_unbiased());
}

#[test]
fn variance_decay_slopes() {
    check(acc::variance_decay_slopes());
}

#[test]
fn convex_rate() {
    check(acc::convex_rate());
}

#[test]
fn nonconvex_rate() {
    check(acc::nonconvex_rate());
}

#[test]
fn submodular_ratio() {
    check(acc::submodular_ratio());
}

#[test]
fn fd_hvp_error_bound() {
    check(acc::fd_hvp_error_bound());
}

#[test]
fn option_parity() {
    check(acc::option_parity());
}

#[test]
fn single_sample_discipline() {
    check(acc::single_sample_discipline());
}

#[test]
fn zero_noise_determinism() {
    check(acc::zero_noise_determinism());
}

#[test]
fn mutation_detection() {
    check(acc::mutation_detection());
}
