//! The randomized enclosure-containment suite, shared between the routine
//! soundness tests and the acceptance gate.

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use circover_core::interval::Interval;

use super::oracle;

pub fn rat(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite float")
}

pub fn assert_rational_inside(computed: Interval, value: &BigRational, what: &str) {
    assert!(
        &rat(computed.lo()) <= value && value <= &rat(computed.hi()),
        "{what}: exact value {value} escapes {computed}"
    );
}

/// Random float spanning several magnitudes, never subnormal.
pub fn sample_value(rng: &mut StdRng) -> f64 {
    match rng.random_range(0..4) {
        0 => rng.random_range(-4.0..4.0),
        1 => rng.random_range(-1e3..1e3),
        2 => {
            let mag = 10f64.powf(rng.random_range(-12.0..12.0));
            if rng.random() {
                mag
            } else {
                -mag
            }
        }
        _ => rng.random_range(-1.0..1.0) / 997.0,
    }
}

pub fn sample_interval(rng: &mut StdRng) -> Interval {
    let a = sample_value(rng);
    let w = match rng.random_range(0..3) {
        0 => 0.0,
        1 => rng.random_range(0.0..1e-6),
        _ => rng.random_range(0.0..2.0),
    };
    Interval::new(a, a + w * a.abs().max(1.0))
}

pub fn sample_point_in(rng: &mut StdRng, iv: Interval) -> f64 {
    if iv.width() == 0.0 {
        return iv.lo();
    }
    let t: f64 = rng.random();
    let p = iv.lo() + t * (iv.hi() - iv.lo());
    p.clamp(iv.lo(), iv.hi())
}

/// Containment trials for add/sub/mul/div/power against exact rationals and
/// sin/cos against the fixed-point Taylor oracle. Returns the number of
/// containment assertions performed; every one of them must hold.
pub fn run_containment_suite(trials_per_op: usize, trig_trials: usize) -> usize {
    let mut rng = StdRng::seed_from_u64(0x5eed_c0de_0001);
    let mut performed = 0;

    for _ in 0..trials_per_op {
        let (ia, ib) = (sample_interval(&mut rng), sample_interval(&mut rng));
        let (pa, pb) = (sample_point_in(&mut rng, ia), sample_point_in(&mut rng, ib));
        let (ra, rb) = (rat(pa), rat(pb));

        assert_rational_inside(ia.add(ib), &(&ra + &rb), "add");
        assert_rational_inside(ia.sub(ib), &(&ra - &rb), "sub");
        assert_rational_inside(ia.mul(ib), &(&ra * &rb), "mul");
        performed += 3;

        if !ib.contains(0.0) && !rb.is_zero() {
            assert_rational_inside(ia.div(ib).unwrap(), &(&ra / &rb), "div");
            performed += 1;
        }

        let n = rng.random_range(0..8u32);
        let mut pw = BigRational::one();
        for _ in 0..n {
            pw *= &ra;
        }
        assert_rational_inside(ia.power(n), &pw, "power");
        performed += 1;
    }

    let mut trig_rng = StdRng::seed_from_u64(0x7819_1234);
    for i in 0..trig_trials {
        let x = match i % 3 {
            0 => trig_rng.random_range(-7.0..7.0),
            1 => trig_rng.random_range(-50.0..50.0),
            _ => trig_rng.random_range(-2.0e3..2.0e3),
        };
        let sin_oracle = oracle::sin_enclosure(x);
        super::assert_oracle_inside(Interval::point(x).sin(), &sin_oracle, "sin point");
        let cos_oracle = oracle::cos_enclosure(x);
        super::assert_oracle_inside(Interval::point(x).cos(), &cos_oracle, "cos point");
        performed += 2;

        // Interval arguments: every sampled inner point's oracle value must
        // be inside the evaluated range.
        if i % 5 == 0 {
            let w = trig_rng.random_range(0.0..3.0);
            let iv = Interval::new(x, x + w);
            let s = iv.sin();
            let c = iv.cos();
            for _ in 0..4 {
                let p = sample_point_in(&mut trig_rng, iv);
                super::assert_oracle_inside(s, &oracle::sin_enclosure(p), "sin range");
                super::assert_oracle_inside(c, &oracle::cos_enclosure(p), "cos range");
                performed += 2;
            }
        }
    }
    performed
}

/// Randomized inclusion-monotonicity property check.
pub fn run_monotonicity_suite(trials: usize) {
    let mut rng = StdRng::seed_from_u64(42);
    for _ in 0..trials {
        let a = sample_interval(&mut rng);
        let b = sample_interval(&mut rng);
        let shrink = |iv: Interval, rng: &mut StdRng| -> Interval {
            let lo = sample_point_in(rng, iv);
            let hi = sample_point_in(rng, iv);
            if lo <= hi {
                Interval::new(lo, hi)
            } else {
                Interval::new(hi, lo)
            }
        };
        let a2 = shrink(a, &mut rng);
        let b2 = shrink(b, &mut rng);
        assert!(a2.add(b2).subset(a.add(b)), "add not inclusion monotone");
        assert!(a2.sub(b2).subset(a.sub(b)), "sub not inclusion monotone");
        assert!(a2.mul(b2).subset(a.mul(b)), "mul not inclusion monotone");
        assert!(a2.sin().subset(a.sin()), "sin not inclusion monotone");
        assert!(a2.cos().subset(a.cos()), "cos not inclusion monotone");
        assert!(
            a2.power(3).subset(a.power(3)),
            "power not inclusion monotone"
        );
        if !b.contains(0.0) {
            assert!(
                a2.div(b2).unwrap().subset(a.div(b).unwrap()),
                "div not inclusion monotone"
            );
        }
    }
}
