//! Double-double arithmetic: an unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`,
//! giving roughly 106 bits of significand.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use super::NumericsError;

/// Error-free sum: returns `(s, e)` with `s = fl(a + b)` and `s + e == a + b` exactly.
#[inline]
pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Like [`two_sum`] but requires `|a| >= |b|`.
#[inline]
pub fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

/// Error-free product via fused multiply-add.
#[inline]
pub fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    (p, e)
}

#[derive(Clone, Copy, Default)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

// pi, pi/2 and ln 2 to double-double precision
const PI: DoubleDouble = DoubleDouble::new_raw(3.141592653589793116e+00, 1.224646799147353207e-16);
const HALF_PI: DoubleDouble =
    DoubleDouble::new_raw(1.570796326794896558e+00, 6.123233995736766036e-17);
const LN2: DoubleDouble = DoubleDouble::new_raw(6.931471805599452862e-01, 2.319046813846299558e-17);

// Series terms are dropped once below this fraction of the running sum.
const SERIES_CUTOFF: f64 = 1e-35;

impl DoubleDouble {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };
    pub const ONE: Self = Self { hi: 1.0, lo: 0.0 };
    pub const EPSILON: f64 = 4.93038065763132e-32; // 2^-104

    /// Builds from an already normalized pair.
    pub const fn new_raw(hi: f64, lo: f64) -> Self {
        Self { hi, lo }
    }

    #[inline]
    pub fn new(hi: f64, lo: f64) -> Self {
        let (h, l) = two_sum(hi, lo);
        Self { hi: h, lo: l }
    }

    #[inline]
    pub fn from_f64(v: f64) -> Self {
        Self { hi: v, lo: 0.0 }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn pi() -> Self {
        PI
    }

    pub fn ln2() -> Self {
        LN2
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    #[inline]
    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    /// Multiplies by an exact power of two.
    #[inline]
    pub fn mul_pow2(self, f: f64) -> Self {
        Self { hi: self.hi * f, lo: self.lo * f }
    }

    #[inline]
    pub fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        let e = e + self.lo * b;
        let (h, l) = quick_two_sum(p, e);
        Self { hi: h, lo: l }
    }

    #[inline]
    pub fn add_f64(self, b: f64) -> Self {
        let (s, e) = two_sum(self.hi, b);
        let e = e + self.lo;
        let (h, l) = quick_two_sum(s, e);
        Self { hi: h, lo: l }
    }

    #[inline]
    pub fn sqr(self) -> Self {
        self * self
    }

    pub fn floor(self) -> Self {
        let hi = self.hi.floor();
        if hi == self.hi {
            let (h, l) = quick_two_sum(hi, self.lo.floor());
            Self { hi: h, lo: l }
        } else {
            Self { hi, lo: 0.0 }
        }
    }

    pub fn round(self) -> Self {
        (self + Self::from_f64(0.5)).floor()
    }

    pub fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::ONE;
        }
        let mut base = self;
        let mut e = n.unsigned_abs();
        let mut acc = Self::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base.sqr();
            e >>= 1;
        }
        if n < 0 {
            Self::ONE / acc
        } else {
            acc
        }
    }

    /// Square root by one Newton correction of the double estimate.
    pub fn sqrt(self) -> Self {
        if self.hi == 0.0 {
            return Self::ZERO;
        }
        if self.hi < 0.0 {
            return Self::from_f64(f64::NAN);
        }
        let x = 1.0 / self.hi.sqrt();
        let ax = self.hi * x;
        let ax_dd = Self::from_f64(ax);
        let resid = self - ax_dd.sqr();
        ax_dd.add_f64(resid.hi * (x * 0.5))
    }

    /// [`DoubleDouble::sqrt`] with a domain check.
    pub fn try_sqrt(self) -> Result<Self, NumericsError> {
        if self.hi < 0.0 || self.hi.is_nan() {
            return Err(NumericsError::Domain(self.to_sci_string(17), "sqrt"));
        }
        Ok(self.sqrt())
    }

    /// [`DoubleDouble::ln`] with a domain check.
    pub fn try_ln(self) -> Result<Self, NumericsError> {
        if !(self.hi > 0.0) {
            return Err(NumericsError::Domain(self.to_sci_string(17), "ln"));
        }
        Ok(self.ln())
    }

    /// Reduces `self` modulo pi/2; returns the remainder in `[-pi/4, pi/4]` and the quadrant.
    fn reduce_half_pi(self) -> (Self, i64) {
        let k = (self / HALF_PI).round();
        let r = self - k * HALF_PI;
        (r, k.hi as i64 + k.lo as i64)
    }

    /// Taylor series of sin and cos on the reduced argument.
    fn sin_cos_taylor(r: Self) -> (Self, Self) {
        let r2 = r.sqr();
        let mut s = r;
        let mut term = r;
        let mut n = 1.0;
        loop {
            term = -(term * r2) / ((n + 1.0) * (n + 2.0));
            n += 2.0;
            s += term;
            if term.hi.abs() <= SERIES_CUTOFF * s.hi.abs() || term.hi == 0.0 {
                break;
            }
        }
        let mut c = Self::ONE;
        let mut term = Self::ONE;
        let mut n = 0.0;
        loop {
            term = -(term * r2) / ((n + 1.0) * (n + 2.0));
            n += 2.0;
            c += term;
            if term.hi.abs() <= SERIES_CUTOFF * c.hi.abs() || term.hi == 0.0 {
                break;
            }
        }
        (s, c)
    }

    pub fn sin_cos(self) -> (Self, Self) {
        if !self.is_finite() {
            return (Self::from_f64(f64::NAN), Self::from_f64(f64::NAN));
        }
        let (r, k) = self.reduce_half_pi();
        let (s, c) = Self::sin_cos_taylor(r);
        match k.rem_euclid(4) {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }

    pub fn sin(self) -> Self {
        self.sin_cos().0
    }

    pub fn cos(self) -> Self {
        self.sin_cos().1
    }

    /// Natural log: scale into `[1, 2)` then sum the atanh series.
    pub fn ln(self) -> Self {
        if self.hi <= 0.0 {
            return Self::from_f64(if self.hi == 0.0 { f64::NEG_INFINITY } else { f64::NAN });
        }
        if !self.is_finite() {
            return self;
        }
        let e = self.hi.log2().floor() as i32;
        let mut m = self.mul_pow2((-e as f64).exp2());
        let mut e = e;
        // log2 may be off by one near powers of two
        if m.hi >= 2.0 {
            m = m.mul_pow2(0.5);
            e += 1;
        } else if m.hi < 1.0 {
            m = m.mul_pow2(2.0);
            e -= 1;
        }
        let z = (m - Self::ONE) / (m + Self::ONE);
        let z2 = z.sqr();
        let mut sum = z;
        let mut pow = z;
        let mut k = 1.0;
        loop {
            pow = pow * z2;
            k += 2.0;
            let term = pow / k;
            sum += term;
            if term.hi.abs() <= SERIES_CUTOFF * sum.hi.abs() || term.hi == 0.0 {
                break;
            }
        }
        sum.mul_pow2(2.0) + LN2.mul_f64(e as f64)
    }

    fn pow10(e: i32) -> Self {
        Self::from_f64(10.0).powi(e)
    }

    /// Formats in scientific notation with `digits` significant digits.
    pub fn to_sci_string(self, digits: usize) -> String {
        let digits = digits.max(1);
        if self.hi == 0.0 {
            return format!("{:.*}e0", digits - 1, 0.0);
        }
        if !self.is_finite() {
            return format!("{}", self.hi);
        }
        let neg = self.hi < 0.0;
        let x = self.abs();
        let mut e = x.hi.log10().floor() as i32;
        let mut r = x / Self::pow10(e);
        if r.hi >= 10.0 {
            r = r / 10.0;
            e += 1;
        } else if r.hi < 1.0 {
            r = r * 10.0;
            e -= 1;
        }
        // one guard digit for rounding
        let mut ds: Vec<u8> = Vec::with_capacity(digits + 1);
        for _ in 0..=digits {
            let d = r.hi.floor().clamp(0.0, 9.0);
            ds.push(d as u8);
            r = (r - Self::from_f64(d)) * 10.0;
        }
        let guard = ds.pop().unwrap_or(0);
        if guard >= 5 {
            let mut i = ds.len();
            loop {
                if i == 0 {
                    ds.insert(0, 1);
                    ds.pop();
                    e += 1;
                    break;
                }
                i -= 1;
                if ds[i] == 9 {
                    ds[i] = 0;
                } else {
                    ds[i] += 1;
                    break;
                }
            }
        }
        let mut s = String::with_capacity(digits + 8);
        if neg {
            s.push('-');
        }
        s.push((b'0' + ds[0]) as char);
        if digits > 1 {
            s.push('.');
            for d in &ds[1..] {
                s.push((b'0' + d) as char);
            }
        }
        s.push('e');
        s.push_str(&e.to_string());
        s
    }
}

impl FromStr for DoubleDouble {
    type Err = NumericsError;

    /// Parses a decimal literal such as `-0.97000436` or `2.95912208286e-4`
    /// directly into double-double, without a detour through `f64`.
    fn from_str(src: &str) -> Result<Self, Self::Err> {
        let bad = || NumericsError::Parse(src.to_string());
        let t = src.trim();
        let (neg, body) = match t.as_bytes().first() {
            Some(b'-') => (true, &t[1..]),
            Some(b'+') => (false, &t[1..]),
            _ => (false, t),
        };
        let (mant, exp) = match body.find(['e', 'E']) {
            Some(i) => (&body[..i], body[i + 1..].parse::<i32>().map_err(|_| bad())?),
            None => (body, 0),
        };
        let mut acc = Self::ZERO;
        let mut frac_digits = 0i32;
        let mut seen_dot = false;
        let mut any = false;
        for c in mant.chars() {
            match c {
                '.' if !seen_dot => seen_dot = true,
                '0'..='9' => {
                    any = true;
                    acc = acc * 10.0 + Self::from_f64(f64::from(c as u8 - b'0'));
                    if seen_dot {
                        frac_digits += 1;
                    }
                }
                '_' => {}
                _ => return Err(bad()),
            }
        }
        if !any {
            return Err(bad());
        }
        let e = exp - frac_digits;
        let v = match e.cmp(&0) {
            Ordering::Equal => acc,
            Ordering::Greater => acc * Self::pow10(e),
            Ordering::Less => acc / Self::pow10(-e),
        };
        Ok(if neg { -v } else { v })
    }
}

impl fmt::Debug for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DD({})", self.to_sci_string(32))
    }
}

impl fmt::Display for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(32);
        f.write_str(&self.to_sci_string(digits))
    }
}

impl PartialEq for DoubleDouble {
    fn eq(&self, other: &Self) -> bool {
        self.hi == other.hi && self.lo == other.lo
    }
}

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi)? {
            Ordering::Equal => self.lo.partial_cmp(&other.lo),
            o => Some(o),
        }
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self { hi: -self.hi, lo: -self.lo }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    #[inline]
    fn add(self, b: Self) -> Self {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let s2 = s2 + t1;
        let (s1, s2) = quick_two_sum(s1, s2);
        let s2 = s2 + t2;
        let (h, l) = quick_two_sum(s1, s2);
        Self { hi: h, lo: l }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    #[inline]
    fn sub(self, b: Self) -> Self {
        self + (-b)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    #[inline]
    fn mul(self, b: Self) -> Self {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (h, l) = quick_two_sum(p, e);
        Self { hi: h, lo: l }
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    #[inline]
    fn div(self, b: Self) -> Self {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (q1, q2) = quick_two_sum(q1, q2);
        Self { hi: q1, lo: q2 }.add_f64(q3)
    }
}

impl Mul<f64> for DoubleDouble {
    type Output = Self;
    #[inline]
    fn mul(self, b: f64) -> Self {
        self.mul_f64(b)
    }
}

impl Div<f64> for DoubleDouble {
    type Output = Self;
    #[inline]
    fn div(self, b: f64) -> Self {
        self / Self::from_f64(b)
    }
}

impl AddAssign for DoubleDouble {
    #[inline]
    fn add_assign(&mut self, b: Self) {
        *self = *self + b;
    }
}

impl SubAssign for DoubleDouble {
    #[inline]
    fn sub_assign(&mut self, b: Self) {
        *self = *self - b;
    }
}

impl MulAssign for DoubleDouble {
    #[inline]
    fn mul_assign(&mut self, b: Self) {
        *self = *self * b;
    }
}

impl DivAssign for DoubleDouble {
    #[inline]
    fn div_assign(&mut self, b: Self) {
        *self = *self / b;
    }
}
