//! Randomized property suites: associativity, representation homomorphism,
//! concurrency, jump closure, FPC universality and epi-mono uniqueness.

use rulealg_core::verify::standard_suites;

#[test]
fn standard_suites_pass() {
    let reports = standard_suites(200, 11);
    assert_eq!(reports.len(), 10);
    for r in &reports {
        assert_eq!(r.cases, 200, "{}", r.name);
        assert!(r.passed(), "{}: {}", r.name, r.failures.join("\n"));
    }
}
