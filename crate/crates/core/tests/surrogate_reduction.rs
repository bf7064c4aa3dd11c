//! Full-scale run of the surrogate-reduction suite: the original average
//! regret of projected plays must stay within twice the surrogate average
//! regret of the unconstrained iterates, on every sequence and comparator.

use cbmm_core::suites::surrogate_reduction_suite;

#[test]
fn thousand_random_sequences_zero_violations() {
    let report = surrogate_reduction_suite(20240715, 1000);
    assert_eq!(report.sequences, 1000);
    assert_eq!(report.comparisons, 6000);
    assert_eq!(
        report.violations, 0,
        "surrogate bound violated; worst excess {}",
        report.max_excess
    );
    // The bound is meant to be tight-ish, not vacuous: the worst comparator
    // should come within striking distance of it somewhere.
    assert!(
        report.max_excess > -1.0,
        "suite looks degenerate, max excess {}",
        report.max_excess
    );
}

#[test]
fn independent_seed_also_clean() {
    let report = surrogate_reduction_suite(99, 250);
    assert_eq!(report.violations, 0, "worst excess {}", report.max_excess);
}
