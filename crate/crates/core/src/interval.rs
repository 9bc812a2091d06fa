//! Rigorous interval arithmetic over `f64` endpoints.
//!
//! Every operation returns an *enclosure*: for any real points chosen inside
//! the input intervals, the exact real result lies inside the output interval.
//! All verdicts produced by the rest of this crate reduce to predicates on
//! these intervals, so this module is the entire trust base.
//!
//! # Rounding policy
//!
//! Arithmetic is computed in the default round-to-nearest mode and then the
//! affected endpoint is nudged to the adjacent float when (and only when) the
//! operation was inexact. Inexactness and its direction are detected with
//! error-free transformations (TwoSum for `+`/`-`, an FMA residual for `*`
//! and `/`), so exact results such as `[1,2]+[3,4] = [4,6]` keep exact
//! endpoints while inexact ones are widened outward by exactly one ulp. Near
//! the subnormal range (`|result| < 1e-300`), where FMA residuals are not
//! guaranteed representable, the endpoint is nudged unconditionally instead.
//!
//! # Overflow
//!
//! Endpoints are ordinarily finite. If an operation overflows, the affected
//! endpoint saturates to `±inf`, which still denotes a sound (unbounded)
//! enclosure; the opposite endpoint saturates to `±f64::MAX`, which is also
//! sound because round-to-nearest only overflows past the largest finite
//! float. Infinite endpoints never certify anything: every predicate in this
//! module answers `true` only when the relation provably holds. Degenerate
//! infinite intervals (`lo = +inf` or `hi = -inf`) are not representable, and
//! neither are empty intervals; disjointness is expressed through predicates,
//! never through an empty result.
//!
//! # sin / cos
//!
//! Range evaluation reduces the argument by a validated multiple of an
//! enclosure of 2*pi, takes the hull of padded endpoint values, and joins in
//! `+/-1` whenever a critical point possibly lies inside the reduced
//! interval. Point values use the platform `sin` padded by two ulps on each
//! side (one ulp for the documented accuracy of the host libm plus one ulp of
//! safety); the randomized oracle suite in `tests/interval_soundness.rs`
//! exercises this bound.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IntervalError {
    #[error("division by interval containing zero")]
    DivisionByZero,
    #[error("invalid interval endpoints [{lo}, {hi}]")]
    InvalidEndpoints { lo: String, hi: String },
}

/// A closed interval `[lo, hi]` of reals, used as an enclosure.
#[derive(Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

/// Largest argument magnitude for which sin/cos argument reduction is
/// attempted; beyond it the full range `[-1, 1]` is returned.
const TRIG_REDUCTION_LIMIT: f64 = 1e12;

/// Below this magnitude FMA residuals may be inexact, so directed rounding
/// falls back to unconditional nudging.
const EFT_UNDERFLOW_GUARD: f64 = 1e-300;

// Arithmetic is exposed as named methods (the operator impls delegate to
// them) because division is fallible and cannot satisfy `std::ops::Div`.
#[allow(clippy::should_implement_trait)]
impl Interval {
    /// `f64::consts::PI` is known to be below the real pi, so `[PI,
    /// next_up(PI)]` encloses it. Verified against an independent
    /// Machin-series oracle in the test suite.
    pub const PI: Interval = Interval {
        lo: std::f64::consts::PI,
        hi: std::f64::consts::PI.next_up(),
    };

    /// Exact doubling of [`Interval::PI`].
    pub const TWO_PI: Interval = Interval {
        lo: 2.0 * std::f64::consts::PI,
        hi: 2.0 * std::f64::consts::PI.next_up(),
    };

    /// Exact halving of [`Interval::PI`].
    pub const HALF_PI: Interval = Interval {
        lo: 0.5 * std::f64::consts::PI,
        hi: 0.5 * std::f64::consts::PI.next_up(),
    };

    pub const UNIT: Interval = Interval { lo: 0.0, hi: 1.0 };

    /// Builds `[lo, hi]`, panicking on NaN, `lo > hi`, or a degenerate
    /// infinite interval. Use [`Interval::checked`] for untrusted input.
    pub fn new(lo: f64, hi: f64) -> Interval {
        match Interval::checked(lo, hi) {
            Ok(iv) => iv,
            Err(e) => panic!("{e}"),
        }
    }

    pub fn checked(lo: f64, hi: f64) -> Result<Interval, IntervalError> {
        if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY
        {
            return Err(IntervalError::InvalidEndpoints {
                lo: format!("{lo}"),
                hi: format!("{hi}"),
            });
        }
        Ok(Interval { lo, hi })
    }

    /// The degenerate interval `[v, v]`.
    pub fn point(v: f64) -> Interval {
        Interval::new(v, v)
    }

    /// Rigorous enclosure of the rational `num/den`.
    pub fn from_ratio(num: i64, den: i64) -> Result<Interval, IntervalError> {
        Interval::point(num as f64).div(Interval::point(den as f64))
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn add(self, rhs: Interval) -> Interval {
        Interval {
            lo: add_down(self.lo, rhs.lo),
            hi: add_up(self.hi, rhs.hi),
        }
    }

    pub fn sub(self, rhs: Interval) -> Interval {
        // Negation is exact, so subtraction reuses directed addition.
        Interval {
            lo: add_down(self.lo, -rhs.hi),
            hi: add_up(self.hi, -rhs.lo),
        }
    }

    pub fn neg(self) -> Interval {
        Interval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }

    pub fn mul(self, rhs: Interval) -> Interval {
        let (a, b, c, d) = (self.lo, self.hi, rhs.lo, rhs.hi);
        let lo = mul_down(a, c)
            .min(mul_down(a, d))
            .min(mul_down(b, c))
            .min(mul_down(b, d));
        let hi = mul_up(a, c)
            .max(mul_up(a, d))
            .max(mul_up(b, c))
            .max(mul_up(b, d));
        Interval { lo, hi }
    }

    /// Division; the divisor must not contain zero.
    pub fn div(self, rhs: Interval) -> Result<Interval, IntervalError> {
        if rhs.lo <= 0.0 && rhs.hi >= 0.0 {
            return Err(IntervalError::DivisionByZero);
        }
        let (a, b, c, d) = (self.lo, self.hi, rhs.lo, rhs.hi);
        let lo = div_down(a, c)
            .min(div_down(a, d))
            .min(div_down(b, c))
            .min(div_down(b, d));
        let hi = div_up(a, c)
            .max(div_up(a, d))
            .max(div_up(b, c))
            .max(div_up(b, d));
        Ok(Interval { lo, hi })
    }

    /// Enclosure of `{x^n : x in self}`. Even powers use the monotonicity
    /// split around zero, so `[-1,1]^2 = [0,1]` rather than `[-1,1]`.
    pub fn power(self, n: u32) -> Interval {
        match n {
            0 => Interval::point(1.0),
            1 => self,
            _ if n.is_multiple_of(2) => {
                if self.lo >= 0.0 {
                    Interval {
                        lo: pow_down_nonneg(self.lo, n),
                        hi: pow_up_nonneg(self.hi, n),
                    }
                } else if self.hi <= 0.0 {
                    Interval {
                        lo: pow_down_nonneg(-self.hi, n),
                        hi: pow_up_nonneg(-self.lo, n),
                    }
                } else {
                    let m = (-self.lo).max(self.hi);
                    Interval {
                        lo: 0.0,
                        hi: pow_up_nonneg(m, n),
                    }
                }
            }
            _ => Interval {
                lo: pow_down_signed(self.lo, n),
                hi: pow_up_signed(self.hi, n),
            },
        }
    }

    /// Enclosure of the range of `sin` over the interval, clipped to `[-1, 1]`.
    pub fn sin(self) -> Interval {
        let full = Interval::new(-1.0, 1.0);
        if !self.lo.is_finite() || !self.hi.is_finite() {
            return full;
        }
        if self.lo.abs() > TRIG_REDUCTION_LIMIT || self.hi.abs() > TRIG_REDUCTION_LIMIT {
            return full;
        }
        if add_up(self.hi, -self.lo) >= Interval::TWO_PI.lo {
            return full;
        }
        // Shift by a validated multiple of 2*pi so the interval lands near
        // [0, 2*pi); sin over the (slightly widened) shifted set is a
        // superset of sin over the original set.
        let k = (self.lo / (Interval::TWO_PI.lo)).floor();
        let shifted = self.sub(Interval::TWO_PI.mul(Interval::point(k)));

        let mut out = sin_point_enclosure(shifted.lo).hull(sin_point_enclosure(shifted.hi));
        for j in -1..=2 {
            let period_shift = Interval::TWO_PI.mul(Interval::point(j as f64));
            let max_pt = Interval::HALF_PI.add(period_shift);
            if shifted.intersects(max_pt) {
                out = out.hull(Interval::point(1.0));
            }
            let min_pt = Interval::HALF_PI.neg().add(period_shift);
            if shifted.intersects(min_pt) {
                out = out.hull(Interval::point(-1.0));
            }
        }
        out.clamp_to(full)
    }

    /// Enclosure of the range of `cos`, via `cos(x) = sin(x + pi/2)`.
    pub fn cos(self) -> Interval {
        self.add(Interval::HALF_PI).sin()
    }

    /// The `k`-th of `n` subintervals, following the reference scheme
    /// `lo + k*(hi-lo)/n + (x-lo)/n`. Consecutive parts overlap or share an
    /// endpoint (gaps are impossible by outward rounding), each part is
    /// clamped into `self`, and the union of all parts covers `self`.
    ///
    /// Panics if `k >= n` or `n == 0`.
    pub fn part(self, n: usize, k: usize) -> Interval {
        assert!(n >= 1, "part: need at least one part");
        assert!(k < n, "part: index {k} out of range for {n} parts");
        let left = Interval::point(self.lo);
        let n_iv = Interval::point(n as f64);
        let span = Interval::point(self.hi).sub(left);
        let step = span.div(n_iv).expect("n >= 1");
        let offset = self.sub(left).div(n_iv).expect("n >= 1");
        left.add(Interval::point(k as f64).mul(step))
            .add(offset)
            .clamp_to(self)
    }

    /// True only if every point of `self` is strictly below every point of
    /// `rhs` (strict endpoint comparison; shared endpoints do not certify).
    pub fn certainly_less(self, rhs: Interval) -> bool {
        self.hi < rhs.lo
    }

    pub fn certainly_greater(self, rhs: Interval) -> bool {
        rhs.certainly_less(self)
    }

    pub fn subset(self, rhs: Interval) -> bool {
        rhs.lo <= self.lo && self.hi <= rhs.hi
    }

    pub fn subset_interior(self, rhs: Interval) -> bool {
        rhs.lo < self.lo && self.hi < rhs.hi
    }

    pub fn contains(self, p: f64) -> bool {
        self.lo <= p && p <= self.hi
    }

    pub fn intersects(self, rhs: Interval) -> bool {
        self.lo <= rhs.hi && rhs.lo <= self.hi
    }

    /// Upper bound on `hi - lo`.
    pub fn width(self) -> f64 {
        add_up(self.hi, -self.lo)
    }

    pub fn midpoint(self) -> f64 {
        if !self.lo.is_finite() || !self.hi.is_finite() {
            // Saturated enclosure: pick any interior point.
            if self.lo.is_finite() {
                return self.lo;
            }
            if self.hi.is_finite() {
                return self.hi;
            }
            return 0.0;
        }
        let m = 0.5 * self.lo + 0.5 * self.hi;
        m.clamp(self.lo, self.hi)
    }

    /// Enclosure of `|x|` over the interval.
    pub fn abs(self) -> Interval {
        if self.lo >= 0.0 {
            self
        } else if self.hi <= 0.0 {
            self.neg()
        } else {
            Interval {
                lo: 0.0,
                hi: self.hi.max(-self.lo),
            }
        }
    }

    pub fn hull(self, rhs: Interval) -> Interval {
        Interval {
            lo: self.lo.min(rhs.lo),
            hi: self.hi.max(rhs.hi),
        }
    }

    /// Intersection with a known-overlapping interval.
    fn clamp_to(self, bounds: Interval) -> Interval {
        let lo = self.lo.max(bounds.lo);
        let hi = self.hi.min(bounds.hi);
        debug_assert!(lo <= hi, "clamp_to on disjoint intervals");
        Interval { lo, hi }
    }

    /// Splits at the midpoint; the halves share the split point exactly.
    pub fn bisect(self) -> (Interval, Interval) {
        let m = self.midpoint();
        (Interval::new(self.lo, m), Interval::new(m, self.hi))
    }

    pub fn is_finite(self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:?}, {:?}]", self.lo, self.hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl From<f64> for Interval {
    fn from(v: f64) -> Interval {
        Interval::point(v)
    }
}

impl std::ops::Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        Interval::add(self, rhs)
    }
}

impl std::ops::Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        Interval::sub(self, rhs)
    }
}

impl std::ops::Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        Interval::mul(self, rhs)
    }
}

impl std::ops::Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval::neg(self)
    }
}

#[inline]
fn add_down(a: f64, b: f64) -> f64 {
    let s = a + b;
    if s.is_infinite() {
        return if s > 0.0 { f64::MAX } else { s };
    }
    // TwoSum residual; exact for all finite inputs.
    let bv = s - a;
    let err = (a - (s - bv)) + (b - bv);
    if err < 0.0 {
        s.next_down()
    } else {
        s
    }
}

#[inline]
fn add_up(a: f64, b: f64) -> f64 {
    let s = a + b;
    if s.is_infinite() {
        return if s > 0.0 { s } else { -f64::MAX };
    }
    let bv = s - a;
    let err = (a - (s - bv)) + (b - bv);
    if err > 0.0 {
        s.next_up()
    } else {
        s
    }
}

#[inline]
fn mul_down(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if p.is_infinite() {
        if a.is_infinite() || b.is_infinite() {
            return p;
        }
        return if p > 0.0 { f64::MAX } else { p };
    }
    if p.abs() < EFT_UNDERFLOW_GUARD {
        return p.next_down();
    }
    let err = a.mul_add(b, -p);
    if err < 0.0 {
        p.next_down()
    } else {
        p
    }
}

#[inline]
fn mul_up(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if p.is_infinite() {
        if a.is_infinite() || b.is_infinite() {
            return p;
        }
        return if p > 0.0 { p } else { -f64::MAX };
    }
    if p.abs() < EFT_UNDERFLOW_GUARD {
        return p.next_up();
    }
    let err = a.mul_add(b, -p);
    if err > 0.0 {
        p.next_up()
    } else {
        p
    }
}

#[inline]
fn div_down(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let q = a / b;
    if q.is_infinite() {
        if a.is_infinite() {
            return q;
        }
        return if q > 0.0 { f64::MAX } else { q };
    }
    if q.abs() < EFT_UNDERFLOW_GUARD || b.is_infinite() {
        return q.next_down();
    }
    // Division residual a - q*b, exact via FMA away from under/overflow.
    let r = (-q).mul_add(b, a);
    if r == 0.0 {
        q
    } else if (r > 0.0) == (b > 0.0) {
        // True quotient exceeds q.
        q
    } else {
        q.next_down()
    }
}

#[inline]
fn div_up(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let q = a / b;
    if q.is_infinite() {
        if a.is_infinite() {
            return q;
        }
        return if q > 0.0 { q } else { -f64::MAX };
    }
    if q.abs() < EFT_UNDERFLOW_GUARD || b.is_infinite() {
        return q.next_up();
    }
    let r = (-q).mul_add(b, a);
    if r == 0.0 {
        q
    } else if (r > 0.0) == (b > 0.0) {
        q.next_up()
    } else {
        q
    }
}

fn pow_down_nonneg(x: f64, n: u32) -> f64 {
    debug_assert!(x >= 0.0 || x.is_nan());
    let mut acc = 1.0f64;
    let mut base = x;
    let mut n = n;
    while n > 0 {
        if n & 1 == 1 {
            acc = mul_down(acc, base);
        }
        n >>= 1;
        if n > 0 {
            base = mul_down(base, base);
        }
    }
    acc
}

fn pow_up_nonneg(x: f64, n: u32) -> f64 {
    let mut acc = 1.0f64;
    let mut base = x;
    let mut n = n;
    while n > 0 {
        if n & 1 == 1 {
            acc = mul_up(acc, base);
        }
        n >>= 1;
        if n > 0 {
            base = mul_up(base, base);
        }
    }
    acc
}

fn pow_down_signed(x: f64, n: u32) -> f64 {
    debug_assert!(n % 2 == 1);
    if x >= 0.0 {
        pow_down_nonneg(x, n)
    } else {
        -pow_up_nonneg(-x, n)
    }
}

fn pow_up_signed(x: f64, n: u32) -> f64 {
    debug_assert!(n % 2 == 1);
    if x >= 0.0 {
        pow_up_nonneg(x, n)
    } else {
        -pow_down_nonneg(-x, n)
    }
}

/// Two-ulp padded enclosure of `sin(t)` for a point argument.
fn sin_point_enclosure(t: f64) -> Interval {
    let s = t.sin();
    Interval {
        lo: s.next_down().next_down(),
        hi: s.next_up().next_up(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi)
    }

    #[test]
    fn add_exact_integer_endpoints() {
        assert_eq!(iv(1.0, 2.0).add(iv(3.0, 4.0)), iv(4.0, 6.0));
    }

    #[test]
    fn mul_endpoint_case_analysis() {
        assert_eq!(iv(-1.0, 2.0).mul(iv(3.0, 4.0)), iv(-4.0, 8.0));
    }

    #[test]
    fn div_one_third_is_tight() {
        let q = iv(1.0, 1.0).div(iv(3.0, 3.0)).unwrap();
        let third = 1.0f64 / 3.0;
        assert!(q.contains(third));
        // Two ulps of slack at most.
        assert!(q.width() <= (third.next_up().next_up() - third.next_down().next_down()));
    }

    #[test]
    fn div_by_zero_interval_rejected() {
        assert_eq!(
            iv(1.0, 1.0).div(iv(-1.0, 2.0)),
            Err(IntervalError::DivisionByZero)
        );
        assert_eq!(
            iv(1.0, 1.0).div(iv(0.0, 2.0)),
            Err(IntervalError::DivisionByZero)
        );
    }

    #[test]
    fn power_even_tight_around_zero() {
        assert_eq!(iv(-1.0, 1.0).power(2), iv(0.0, 1.0));
    }

    #[test]
    fn power_odd_monotone() {
        assert_eq!(iv(-1.0, 1.0).power(3), iv(-1.0, 1.0));
    }

    #[test]
    fn power_cube_of_two() {
        let p = iv(2.0, 2.0).power(3);
        assert!(p.contains(8.0));
        assert!(p.width() <= 8.0 * f64::EPSILON);
    }

    #[test]
    fn sin_of_zero_nearly_degenerate() {
        let s = Interval::point(0.0).sin();
        assert!(s.contains(0.0));
        assert!(s.width() <= 5e-323);
    }

    #[test]
    fn sin_over_zero_to_pi() {
        let s = iv(0.0, Interval::PI.hi()).sin();
        assert!(iv(0.0, 1.0).subset(s));
        assert!(s.subset(iv(-1e-12, 1.0)));
    }

    #[test]
    fn sin_clipped_to_unit_range() {
        let s = iv(0.0, 100.0).sin();
        assert_eq!(s, iv(-1.0, 1.0));
    }

    #[test]
    fn cos_of_zero_contains_one() {
        let c = Interval::point(0.0).cos();
        assert!(c.contains(1.0));
        assert!(c.width() < 1e-14);
        assert!(c.hi() <= 1.0);
    }

    #[test]
    fn part_matches_reference_example() {
        let x = iv(1.0, 2.0);
        assert_eq!(x.part(4, 0), iv(1.0, 1.25));
        assert_eq!(x.part(4, 3), iv(1.75, 2.0));
    }

    #[test]
    fn parts_cover_without_gaps() {
        let x = iv(0.0, 1.0);
        let parts: Vec<Interval> = (0..7).map(|k| x.part(7, k)).collect();
        assert_eq!(parts[0].lo(), 0.0);
        assert_eq!(parts[6].hi(), 1.0);
        for w in parts.windows(2) {
            assert!(w[0].hi() >= w[1].lo(), "gap between consecutive parts");
        }
        for p in &parts {
            assert!(p.subset(x));
        }
    }

    #[test]
    #[should_panic(expected = "out of range")]
    fn part_index_out_of_range() {
        let _ = iv(0.0, 1.0).part(4, 4);
    }

    #[test]
    fn predicate_examples() {
        assert!(iv(1.0, 2.0).certainly_less(iv(3.0, 4.0)));
        assert!(!iv(1.0, 3.0).certainly_less(iv(3.0, 4.0)));
        assert!(iv(-1.0, 1.0).subset_interior(iv(-1.2, 1.2)));
        assert!(!iv(-1.2, 1.0).subset_interior(iv(-1.2, 1.2)));
        assert!(iv(0.0, 1.0).contains(0.5));
        assert!(iv(0.0, 1.0).intersects(iv(1.0, 2.0)));
        assert!(!iv(0.0, 1.0).intersects(iv(1.5, 2.0)));
    }

    #[test]
    fn certainly_less_excludes_intersection() {
        let a = iv(0.0, 1.0);
        let b = iv(1.0, 2.0);
        assert!(!a.certainly_less(b));
        let c = iv(1.5, 2.0);
        assert!(a.certainly_less(c) && !a.intersects(c));
    }

    #[test]
    fn pi_enclosure_brackets_float_pi() {
        assert!(Interval::PI.lo() < Interval::PI.hi());
        assert_eq!(Interval::PI.lo(), std::f64::consts::PI);
        assert!(Interval::TWO_PI.contains(2.0 * std::f64::consts::PI));
    }

    #[test]
    fn overflow_saturates_soundly() {
        let big = iv(1e308, 1e308);
        let sum = big.add(big);
        assert_eq!(sum.hi(), f64::INFINITY);
        assert!(sum.lo() >= 1e308);
        // Saturated enclosures certify nothing.
        assert!(!sum.certainly_less(iv(f64::MAX, f64::MAX)));
    }

    #[test]
    fn from_ratio_encloses_tenth() {
        let mu = Interval::from_ratio(1, 10).unwrap();
        assert!(mu.lo() <= 0.1 && 0.1 <= mu.hi());
        assert!(mu.width() < 1e-16);
    }

    #[test]
    fn bisect_shares_split_point() {
        let (l, r) = iv(0.0, 1.0).bisect();
        assert_eq!(l.hi(), r.lo());
        assert_eq!(l.lo(), 0.0);
        assert_eq!(r.hi(), 1.0);
    }
}
