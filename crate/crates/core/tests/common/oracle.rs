//! An extended-precision oracle built on fixed-point big integers: values
//! are `mantissa / 2^SHIFT` with `SHIFT = 120`. Everything is computed as a
//! pair of directed bounds, so the oracle output is itself an enclosure —
//! about 1e-36 wide — entirely independent of the crate's f64 interval
//! arithmetic.
//!
//! pi comes from Machin's formula `pi = 16 atan(1/5) - 4 atan(1/239)` with
//! alternating-series remainder bounds; sin/cos reduce by a validated
//! multiple of pi/2 and evaluate directed Taylor polynomials.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub const SHIFT: u32 = 120;

/// Fixed-point number `mantissa / 2^SHIFT`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Fp(pub BigInt);

impl Fp {
    pub fn zero() -> Fp {
        Fp(BigInt::zero())
    }

    pub fn one() -> Fp {
        Fp(BigInt::one() << SHIFT)
    }

    /// Exact conversion; panics if the float has bits below 2^-SHIFT
    /// (callers sample away from the subnormal range).
    pub fn from_f64(v: f64) -> Fp {
        assert!(v.is_finite(), "oracle got non-finite {v}");
        if v == 0.0 {
            return Fp::zero();
        }
        let (mantissa, exponent, sign) = integer_decode(v);
        let m = BigInt::from(mantissa) * BigInt::from(sign);
        let shift = exponent + SHIFT as i64;
        assert!(
            shift >= 0,
            "float {v} has precision below the oracle fixed point"
        );
        Fp(m << (shift as usize))
    }

    /// Rounds toward negative infinity when the float is finer than the
    /// fixed point (only possible deep in the subnormal range).
    pub fn from_f64_down(v: f64) -> Fp {
        Fp::from_f64_directed(v, false)
    }

    pub fn from_f64_up(v: f64) -> Fp {
        Fp::from_f64_directed(v, true)
    }

    fn from_f64_directed(v: f64, up: bool) -> Fp {
        assert!(v.is_finite(), "oracle got non-finite {v}");
        if v == 0.0 {
            return Fp::zero();
        }
        let (mantissa, exponent, sign) = integer_decode(v);
        let m = BigInt::from(mantissa) * BigInt::from(sign);
        let shift = exponent + SHIFT as i64;
        if shift >= 0 {
            return Fp(m << (shift as usize));
        }
        let scale = BigInt::one() << ((-shift) as usize);
        Fp(if up { m.div_ceil(&scale) } else { m.div_floor(&scale) })
    }

    pub fn approx(&self) -> f64 {
        let scale = 2f64.powi(-(SHIFT as i32));
        self.0.to_f64().map(|m| m * scale).unwrap_or(f64::NAN)
    }

    pub fn abs(&self) -> Fp {
        Fp(self.0.abs())
    }
}

fn integer_decode(v: f64) -> (u64, i64, i64) {
    let bits = v.to_bits();
    let sign = if bits >> 63 == 0 { 1 } else { -1 };
    let mut exponent = ((bits >> 52) & 0x7ff) as i64;
    let mantissa = if exponent == 0 {
        (bits & 0xf_ffff_ffff_ffff) << 1
    } else {
        (bits & 0xf_ffff_ffff_ffff) | 0x10_0000_0000_0000
    };
    exponent -= 1075;
    (mantissa, exponent, sign)
}

/// Directed pair of fixed-point bounds; the true value lies between them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FpPair {
    pub lo: Fp,
    pub hi: Fp,
}

impl FpPair {
    pub fn exact(v: Fp) -> FpPair {
        FpPair {
            lo: v.clone(),
            hi: v,
        }
    }

    pub fn from_f64(v: f64) -> FpPair {
        FpPair::exact(Fp::from_f64(v))
    }

    pub fn approx(&self) -> (f64, f64) {
        (self.lo.approx(), self.hi.approx())
    }

    pub fn add(&self, rhs: &FpPair) -> FpPair {
        FpPair {
            lo: Fp(&self.lo.0 + &rhs.lo.0),
            hi: Fp(&self.hi.0 + &rhs.hi.0),
        }
    }

    pub fn sub(&self, rhs: &FpPair) -> FpPair {
        FpPair {
            lo: Fp(&self.lo.0 - &rhs.hi.0),
            hi: Fp(&self.hi.0 - &rhs.lo.0),
        }
    }

    pub fn neg(&self) -> FpPair {
        FpPair {
            lo: Fp(-&self.hi.0),
            hi: Fp(-&self.lo.0),
        }
    }

    /// Directed product: candidates are divided by 2^SHIFT with floor for
    /// the lower bound and ceiling for the upper.
    pub fn mul(&self, rhs: &FpPair) -> FpPair {
        let scale = BigInt::one() << SHIFT;
        let products = [
            &self.lo.0 * &rhs.lo.0,
            &self.lo.0 * &rhs.hi.0,
            &self.hi.0 * &rhs.lo.0,
            &self.hi.0 * &rhs.hi.0,
        ];
        let lo = products.iter().map(|p| p.div_floor(&scale)).min().unwrap();
        let hi = products.iter().map(|p| p.div_ceil(&scale)).max().unwrap();
        FpPair { lo: Fp(lo), hi: Fp(hi) }
    }

    pub fn mul_int(&self, k: &BigInt) -> FpPair {
        let a = Fp(&self.lo.0 * k);
        let b = Fp(&self.hi.0 * k);
        if a <= b {
            FpPair { lo: a, hi: b }
        } else {
            FpPair { lo: b, hi: a }
        }
    }

    /// Directed division by a positive integer.
    pub fn div_uint(&self, k: &BigInt) -> FpPair {
        assert!(k.is_positive());
        FpPair {
            lo: Fp(self.lo.0.div_floor(k)),
            hi: Fp(self.hi.0.div_ceil(k)),
        }
    }

    /// Widens by one fixed-point unit on each side.
    pub fn slack(&self, units: u64) -> FpPair {
        let u = BigInt::from(units);
        FpPair {
            lo: Fp(&self.lo.0 - &u),
            hi: Fp(&self.hi.0 + &u),
        }
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.0.is_positive() && !self.hi.0.is_negative()
    }
}

/// `atan(1/q)` by the alternating Taylor series with a remainder bound of
/// one extra term.
fn atan_inv(q: u64) -> FpPair {
    let q = BigInt::from(q);
    let qq = &q * &q;
    let one = BigInt::one() << SHIFT;
    let mut lo = BigInt::zero();
    let mut hi = BigInt::zero();
    let mut denom_pow = q.clone();
    let mut j = 0u64;
    loop {
        let factor = BigInt::from(2 * j + 1) * &denom_pow;
        let term_lo = one.div_floor(&factor);
        let term_hi = one.div_ceil(&factor);
        if j.is_multiple_of(2) {
            lo += &term_lo;
            hi += &term_hi;
        } else {
            lo -= &term_hi;
            hi -= &term_lo;
        }
        denom_pow *= &qq;
        j += 1;
        let next = one.div_ceil(&(BigInt::from(2 * j + 1) * &denom_pow));
        if next <= BigInt::from(2) {
            // Alternating remainder is below the next term.
            lo -= &next + BigInt::one();
            hi += &next + BigInt::one();
            return FpPair { lo: Fp(lo), hi: Fp(hi) };
        }
    }
}

/// Enclosure of pi from Machin's formula.
pub fn pi() -> &'static FpPair {
    static PI: OnceLock<FpPair> = OnceLock::new();
    PI.get_or_init(|| {
        let a = atan_inv(5).mul_int(&BigInt::from(16));
        let b = atan_inv(239).mul_int(&BigInt::from(4));
        a.sub(&b)
    })
}

pub fn half_pi() -> &'static FpPair {
    static HALF: OnceLock<FpPair> = OnceLock::new();
    HALF.get_or_init(|| pi().div_uint(&BigInt::from(2)))
}

/// Directed Taylor polynomial of sin on `|x| <= 0.9`, returned as a pair.
fn taylor_sin(x: &Fp) -> FpPair {
    let x_pair = FpPair::exact(x.clone());
    let xx = x_pair.mul(&x_pair);
    let mut sum = FpPair::exact(Fp::zero());
    let mut power = x_pair.clone();
    let mut factorial = BigInt::one();
    let mut j = 0u64;
    loop {
        let term = power.div_uint(&factorial);
        if j.is_multiple_of(2) {
            sum = sum.add(&term);
        } else {
            sum = sum.sub(&term);
        }
        // Next odd power and factorial.
        power = power.mul(&xx);
        let n = 2 * j + 2;
        factorial *= BigInt::from(n) * BigInt::from(n + 1);
        j += 1;
        let bound = power
            .hi
            .abs()
            .0
            .max(power.lo.abs().0.clone())
            .div_ceil(&factorial);
        if bound <= BigInt::from(4) {
            return sum.slack(bound.to_u64().unwrap_or(4) + 2);
        }
    }
}

/// Directed Taylor polynomial of cos on `|x| <= 0.9`.
fn taylor_cos(x: &Fp) -> FpPair {
    let x_pair = FpPair::exact(x.clone());
    let xx = x_pair.mul(&x_pair);
    let mut sum = FpPair::exact(Fp::zero());
    let mut power = FpPair::exact(Fp::one());
    let mut factorial = BigInt::one();
    let mut j = 0u64;
    loop {
        let term = power.div_uint(&factorial);
        if j.is_multiple_of(2) {
            sum = sum.add(&term);
        } else {
            sum = sum.sub(&term);
        }
        power = power.mul(&xx);
        let n = 2 * j + 1;
        factorial *= BigInt::from(n) * BigInt::from(n + 1);
        j += 1;
        let bound = power
            .hi
            .abs()
            .0
            .max(power.lo.abs().0.clone())
            .div_ceil(&factorial);
        if bound <= BigInt::from(4) {
            return sum.slack(bound.to_u64().unwrap_or(4) + 2);
        }
    }
}

/// Enclosure of `sin(x)` for a float argument with `|x| <= 1e9`.
pub fn sin_enclosure(x: f64) -> FpPair {
    assert!(x.abs() <= 1e9, "oracle sin argument too large: {x}");
    let half_pi_mid = std::f64::consts::FRAC_PI_2;
    let k = (x / half_pi_mid).round();
    let k_int = BigInt::from(k as i64);
    let reduced = FpPair::from_f64(x).sub(&half_pi().mul_int(&k_int));
    // |reduced| <= pi/4 plus reduction slack; the Taylor domain is safe.
    debug_assert!(reduced.lo.approx().abs() <= 0.9 && reduced.hi.approx().abs() <= 0.9);
    let quadrant = (k as i64).rem_euclid(4);
    let r_lo = reduced.lo.clone();
    let r_hi = reduced.hi.clone();
    let on_pair = |f: fn(&Fp) -> FpPair, monotone_up: bool| -> FpPair {
        let a = f(&r_lo);
        let b = f(&r_hi);
        if monotone_up {
            FpPair { lo: a.lo, hi: b.hi }
        } else {
            FpPair { lo: b.lo, hi: a.hi }
        }
    };
    match quadrant {
        // sin(x) = sin(r): increasing on [-pi/4, pi/4].
        0 => on_pair(taylor_sin, true),
        // sin(x) = cos(r): decreasing iff r > 0; take a hull that covers
        // both endpoint orders plus the possible maximum at r = 0.
        1 => {
            let a = taylor_cos(&r_lo);
            let b = taylor_cos(&r_hi);
            let mut lo = a.lo.clone().min(b.lo.clone());
            let mut hi = a.hi.clone().max(b.hi.clone());
            if reduced.contains_zero() {
                lo = lo.min(Fp::one());
                hi = hi.max(Fp::one());
            }
            FpPair { lo, hi }
        }
        // sin(x) = -sin(r).
        2 => on_pair(taylor_sin, true).neg(),
        // sin(x) = -cos(r).
        _ => {
            let a = taylor_cos(&r_lo);
            let b = taylor_cos(&r_hi);
            let mut lo = a.lo.clone().min(b.lo.clone());
            let mut hi = a.hi.clone().max(b.hi.clone());
            if reduced.contains_zero() {
                lo = lo.min(Fp::one());
                hi = hi.max(Fp::one());
            }
            FpPair { lo, hi }.neg()
        }
    }
}

/// Enclosure of `cos(x)` via the sine oracle on a shifted argument kept
/// exact in fixed point: `cos(x) = sin(x + pi/2)` evaluated by quadrant
/// bookkeeping rather than float addition.
pub fn cos_enclosure(x: f64) -> FpPair {
    assert!(x.abs() <= 1e9, "oracle cos argument too large: {x}");
    let half_pi_mid = std::f64::consts::FRAC_PI_2;
    // cos(x) = sin(pi/2 - x) and sin is handled above; reuse the reduction
    // with k shifted by one quadrant.
    let k = (x / half_pi_mid).round();
    let k_int = BigInt::from(k as i64);
    let reduced = FpPair::from_f64(x).sub(&half_pi().mul_int(&k_int));
    debug_assert!(reduced.lo.approx().abs() <= 0.9 && reduced.hi.approx().abs() <= 0.9);
    let quadrant = (k as i64).rem_euclid(4);
    let r_lo = reduced.lo.clone();
    let r_hi = reduced.hi.clone();
    let cos_pair = |_unused: ()| -> FpPair {
        let a = taylor_cos(&r_lo);
        let b = taylor_cos(&r_hi);
        let mut lo = a.lo.clone().min(b.lo.clone());
        let mut hi = a.hi.clone().max(b.hi.clone());
        if reduced.contains_zero() {
            lo = lo.min(Fp::one());
            hi = hi.max(Fp::one());
        }
        FpPair { lo, hi }
    };
    let sin_pair_inc = |_unused: ()| -> FpPair {
        let a = taylor_sin(&r_lo);
        let b = taylor_sin(&r_hi);
        FpPair { lo: a.lo, hi: b.hi }
    };
    match quadrant {
        // x = r: cos(x) = cos(r).
        0 => cos_pair(()),
        // x = pi/2 + r: cos(x) = -sin(r).
        1 => sin_pair_inc(()).neg(),
        // x = pi + r: cos(x) = -cos(r).
        2 => cos_pair(()).neg(),
        // x = 3pi/2 + r: cos(x) = sin(r).
        _ => sin_pair_inc(()),
    }
}

#[cfg(test)]
mod self_checks {
    use super::*;

    #[test]
    fn oracle_pi_matches_float_pi() {
        let (lo, hi) = pi().approx();
        assert!(lo <= std::f64::consts::PI && std::f64::consts::PI <= hi + 1e-15);
        assert!((hi - lo) < 1e-30);
    }
}
