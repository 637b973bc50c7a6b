use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use structural::numerics::{two_sum, DoubleDouble as DD, NumericsError, Scalar};

fn q(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

fn qdd(x: DD) -> BigRational {
    q(x.hi) + q(x.lo)
}

fn pow2(e: i32) -> BigRational {
    let two = BigRational::from_integer(BigInt::from(2));
    if e >= 0 {
        num::pow(two, e as usize)
    } else {
        BigRational::one() / num::pow(two, (-e) as usize)
    }
}

fn rel_err(got: &BigRational, exact: &BigRational) -> f64 {
    let d = (got - exact).abs();
    if exact.is_zero() {
        return if d.is_zero() { 0.0 } else { f64::INFINITY };
    }
    let r = d / exact.abs();
    // ratio of integers may be huge; go through a scaled integer
    let scaled = (r * pow2(200)).to_integer();
    scaled.to_string().parse::<f64>().unwrap() * 2f64.powi(-200)
}

fn random_f64(rng: &mut ChaCha8Rng) -> f64 {
    let m: f64 = rng.gen_range(1.0..2.0);
    let e: i32 = rng.gen_range(-60..60);
    let s = if rng.gen_bool(0.5) { -1.0 } else { 1.0 };
    s * m * 2f64.powi(e)
}

fn random_dd(rng: &mut ChaCha8Rng) -> DD {
    let hi = random_f64(rng);
    let lo = hi * 2f64.powi(-53) * rng.gen_range(-0.5..0.5);
    DD::new(hi, lo)
}

#[test]
fn two_sum_is_error_free_on_a_million_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1_000_000 {
        let (a, b) = (random_f64(&mut rng), random_f64(&mut rng));
        let (s, e) = two_sum(a, b);
        assert_eq!(s, a + b);
        assert!(q(s) + q(e) == q(a) + q(b), "two_sum({a:e}, {b:e})");
    }
}

#[test]
fn two_sum_examples() {
    assert_eq!(two_sum(1.0, 1.0), (2.0, 0.0));
    assert_eq!(two_sum(1.0, 2f64.powi(-60)), (1.0, 2f64.powi(-60)));
    let (s, e) = two_sum(0.1, 0.2);
    assert_eq!(s, 0.30000000000000004);
    assert!(q(s) + q(e) == q(0.1) + q(0.2));
}

#[test]
fn dd_mul_error_bound() {
    let bound = 2f64.powi(-100);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20_000 {
        let (a, b) = (random_dd(&mut rng), random_dd(&mut rng));
        let got = qdd(a * b);
        let exact = qdd(a) * qdd(b);
        assert!(rel_err(&got, &exact) <= bound, "{a:?} * {b:?}");
    }
    let third = DD::ONE / DD::from_f64(3.0);
    assert!(rel_err(&qdd(third * DD::from_f64(3.0)), &BigRational::one()) <= bound);
    let (u, v) = (DD::new(2f64.powi(50), 2f64.powi(-50)), DD::new(2f64.powi(50), -(2f64.powi(-50))));
    let exact = pow2(100) - pow2(-100);
    assert!(rel_err(&qdd(u * v), &exact) <= bound);
    for x in [DD::pi(), third, DD::from_f64(-7.25)] {
        assert_eq!(DD::ONE * x, x);
    }
}

#[test]
fn addition_reassociation_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20_000 {
        let mut t = [random_dd(&mut rng), random_dd(&mut rng), random_dd(&mut rng)];
        // same sign keeps |a+b+c| away from cancellation
        for v in t.iter_mut() {
            *v = v.abs();
        }
        let [a, b, c] = t;
        let l = qdd((a + b) + c);
        let r = qdd(a + (b + c));
        let sum = qdd(a) + qdd(b) + qdd(c);
        assert!((l - r).abs() <= pow2(-98) * sum.abs());
    }
}

/// sin(1) as a rational partial sum, far below the 1e-28 tolerance.
fn sin_one_rational() -> BigRational {
    let mut sum = BigRational::zero();
    let mut fact = BigInt::one();
    for k in 1..45u32 {
        fact *= BigInt::from(k);
        if k % 2 == 1 {
            let term = BigRational::new(BigInt::one(), fact.clone());
            if (k / 2) % 2 == 0 {
                sum += term;
            } else {
                sum -= term;
            }
        }
    }
    sum
}

#[test]
fn sin_of_one_against_rational_series() {
    let exact = sin_one_rational();
    let got = DD::from_f64(1.0).sin();
    assert!(rel_err(&qdd(got), &exact) <= 1e-28, "{got}");
    assert!(got.to_sci_string(31).starts_with("8.414709848078965066525023216303"));
}

#[test]
fn ln_two_against_rational_series() {
    // ln 2 = sum 1/(k 2^k)
    let mut exact = BigRational::zero();
    for k in 1..=140i32 {
        exact += BigRational::new(BigInt::one(), BigInt::from(k)) * pow2(-k);
    }
    assert!(rel_err(&qdd(DD::from_f64(2.0).ln()), &exact) <= 1e-28);
}

#[test]
fn sqrt_squares_back() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..2000 {
        let x = random_dd(&mut rng).abs();
        let y = qdd(x.sqrt());
        assert!(rel_err(&(&y * &y), &qdd(x)) <= 2e-28);
    }
    assert_eq!(DD::from_f64(4.0).sqrt(), DD::from_f64(2.0));
}

#[test]
fn pythagorean_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..10_000 {
        let x = DD::from_f64(rng.gen_range(-10.0..10.0)) + DD::from_f64(rng.gen_range(-1e-17..1e-17));
        let (s, c) = x.sin_cos();
        let r = s * s + c * c - DD::ONE;
        assert!(r.abs().to_f64() <= 1e-27, "x = {x}: {r}");
    }
    assert_eq!(DD::ZERO.sin(), DD::ZERO);
    assert_eq!(DD::ZERO.cos(), DD::ONE);
}

#[test]
fn domain_errors() {
    assert!(matches!(DD::from_f64(-1.0).try_sqrt(), Err(NumericsError::Domain(_, "sqrt"))));
    assert!(matches!(DD::from_f64(-1.0).try_ln(), Err(NumericsError::Domain(_, "ln"))));
    assert!(DD::from_f64(0.0).try_ln().is_err());
    assert_eq!(DD::from_f64(9.0).try_sqrt().unwrap(), DD::from_f64(3.0));
}

#[test]
fn literals_are_parsed_without_double_rounding() {
    let tenth: DD = <DD as Scalar>::lit("0.1").unwrap();
    let exact = BigRational::new(BigInt::from(1), BigInt::from(10));
    assert!(rel_err(&qdd(tenth), &exact) <= 1e-31);
    assert_ne!(tenth, DD::from_f64(0.1));
    let g: DD = <DD as Scalar>::lit("2.95912208286e-4").unwrap();
    let exact = BigRational::new(BigInt::from(295912208286i64), BigInt::from(10).pow(15u32));
    assert!(rel_err(&qdd(g), &exact) <= 1e-31);
}

proptest! {
    #[test]
    fn dd_division_inverts_multiplication(a in 1e-100f64..1e100, b in 1e-100f64..1e100) {
        let (a, b) = (DD::from_f64(a), DD::from_f64(b));
        let back = (a * b) / b;
        prop_assert!(rel_err(&qdd(back), &qdd(a)) <= 1e-30);
    }

    #[test]
    fn printing_round_trips(hi in -1e20f64..1e20, frac in -0.5f64..0.5) {
        let x = DD::new(hi, hi * frac * 2f64.powi(-53));
        let s = x.to_sci_string(34);
        let back: DD = s.parse().unwrap();
        prop_assert!(rel_err(&qdd(back), &qdd(x)) <= 1e-31);
    }
}
