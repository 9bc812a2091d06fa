//! Shared test support: high-precision oracles independent of the interval
//! implementation, and plain-float models of the builtin systems.

#![allow(dead_code)]

pub mod model;
pub mod oracle;
pub mod trials;

use circover_core::interval::Interval;

/// Asserts that the oracle enclosure (which is many orders of magnitude
/// tighter than a float interval) lies inside the computed interval, which
/// proves the true value does.
pub fn assert_oracle_inside(computed: Interval, oracle: &oracle::FpPair, what: &str) {
    let lo = oracle::Fp::from_f64_down(computed.lo());
    let hi = oracle::Fp::from_f64_up(computed.hi());
    assert!(
        lo <= oracle.lo && oracle.hi <= hi,
        "{what}: oracle {:?} escapes computed {computed}",
        oracle.approx()
    );
}
