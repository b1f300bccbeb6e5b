//! High-precision oracle for the second-difference zero term.

mod common;

use common::oracle;
use goldbach_core::zero_sums::{second_difference_term, second_difference_term_integral};
use goldbach_core::ZeroSet;

fn check(gamma: f64, n: u64, h: u64) {
    let want = oracle(gamma, n, h);
    let zs = ZeroSet::synthetic(vec![gamma]).unwrap();
    let got = second_difference_term(n, h, &zs).unwrap().value;
    let rel = (got - want).abs() / want.abs();
    assert!(
        rel <= 1e-10,
        "gamma={gamma} N={n} H={h}: {got} vs {want} (rel {rel:e})"
    );
    let int = second_difference_term_integral(n, h, &zs).unwrap().value;
    let rel = (int - want).abs() / want.abs();
    assert!(
        rel <= 1e-8,
        "integral gamma={gamma} N={n} H={h}: {int} vs {want} (rel {rel:e})"
    );
}

#[test]
fn first_zero_moderate_window() {
    check(14.134725, 10_000, 100);
}

#[test]
fn first_zero_tiny_window() {
    check(14.134725, 1_000_000, 1);
}

#[test]
fn first_zero_full_window() {
    check(14.134725, 1000, 1000);
}

#[test]
fn high_zero_windows() {
    check(5000.5, 1_000_000, 10);
    check(74_920.827, 100_000, 1000);
    check(236.524, 50_000, 37);
}
