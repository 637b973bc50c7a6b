//! Scalar backends and the body-space container.
//!
//! Everything downstream is generic over [`Scalar`]; `f64` is the native backend and
//! [`DoubleDouble`] stands in for quadruple precision.

mod bodyspace;
mod dd;

use std::fmt::{Debug, Display};
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bodyspace::BodySpace;
pub use dd::{quick_two_sum, two_prod, two_sum, DoubleDouble};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("cannot parse `{0}` as a decimal literal")]
    Parse(String),
    #[error("{0} is outside the domain of {1}")]
    Domain(String, &'static str),
}

/// Arithmetic backend selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    Double,
    #[serde(rename = "ddouble")]
    DoubleDouble,
}

impl Precision {
    /// Default fixed-point tolerance for this backend.
    pub fn default_tol(self) -> f64 {
        match self {
            Precision::Double => 1e-14,
            Precision::DoubleDouble => 1e-30,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Precision::Double => "double",
            Precision::DoubleDouble => "ddouble",
        }
    }
}

impl std::str::FromStr for Precision {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "double" | "f64" => Ok(Precision::Double),
            "ddouble" | "dd" | "quad" => Ok(Precision::DoubleDouble),
            other => Err(format!("unknown precision `{other}` (expected double or ddouble)")),
        }
    }
}

/// Real scalar used by coefficient tables, problems and solvers.
pub trait Scalar:
    Copy
    + Debug
    + Display
    + Default
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
{
    const PRECISION: Precision;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;
    fn from_dd(v: DoubleDouble) -> Self;
    fn to_dd(self) -> DoubleDouble;
    /// Parses a decimal literal at full backend precision.
    fn lit(s: &str) -> Result<Self, NumericsError>;
    fn pi() -> Self;
    fn sqrt(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn ln(self) -> Self;
    fn abs(self) -> Self;
    fn is_finite(self) -> bool;
    fn powi(self, n: i32) -> Self;

    #[inline]
    fn from_i(v: i64) -> Self {
        Self::from_f64(v as f64)
    }

    #[inline]
    fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    #[inline]
    fn sin_cos(self) -> (Self, Self) {
        (self.sin(), self.cos())
    }
}

impl Scalar for f64 {
    const PRECISION: Precision = Precision::Double;

    #[inline]
    fn zero() -> Self {
        0.0
    }
    #[inline]
    fn one() -> Self {
        1.0
    }
    #[inline]
    fn from_f64(v: f64) -> Self {
        v
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
    #[inline]
    fn from_dd(v: DoubleDouble) -> Self {
        v.to_f64()
    }
    #[inline]
    fn to_dd(self) -> DoubleDouble {
        DoubleDouble::from_f64(self)
    }
    fn lit(s: &str) -> Result<Self, NumericsError> {
        s.trim().parse::<f64>().map_err(|_| NumericsError::Parse(s.to_string()))
    }
    #[inline]
    fn pi() -> Self {
        std::f64::consts::PI
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn sin(self) -> Self {
        f64::sin(self)
    }
    #[inline]
    fn cos(self) -> Self {
        f64::cos(self)
    }
    #[inline]
    fn ln(self) -> Self {
        f64::ln(self)
    }
    #[inline]
    fn abs(self) -> Self {
        f64::abs(self)
    }
    #[inline]
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    #[inline]
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    #[inline]
    fn sin_cos(self) -> (Self, Self) {
        f64::sin_cos(self)
    }
}

impl Scalar for DoubleDouble {
    const PRECISION: Precision = Precision::DoubleDouble;

    #[inline]
    fn zero() -> Self {
        DoubleDouble::ZERO
    }
    #[inline]
    fn one() -> Self {
        DoubleDouble::ONE
    }
    #[inline]
    fn from_f64(v: f64) -> Self {
        DoubleDouble::from_f64(v)
    }
    #[inline]
    fn to_f64(self) -> f64 {
        DoubleDouble::to_f64(self)
    }
    #[inline]
    fn from_dd(v: DoubleDouble) -> Self {
        v
    }
    #[inline]
    fn to_dd(self) -> DoubleDouble {
        self
    }
    fn lit(s: &str) -> Result<Self, NumericsError> {
        s.parse()
    }
    fn pi() -> Self {
        DoubleDouble::pi()
    }
    fn sqrt(self) -> Self {
        DoubleDouble::sqrt(self)
    }
    fn sin(self) -> Self {
        DoubleDouble::sin(self)
    }
    fn cos(self) -> Self {
        DoubleDouble::cos(self)
    }
    fn ln(self) -> Self {
        DoubleDouble::ln(self)
    }
    #[inline]
    fn abs(self) -> Self {
        DoubleDouble::abs(self)
    }
    #[inline]
    fn is_finite(self) -> bool {
        DoubleDouble::is_finite(self)
    }
    fn powi(self, n: i32) -> Self {
        DoubleDouble::powi(self, n)
    }
    fn sin_cos(self) -> (Self, Self) {
        DoubleDouble::sin_cos(self)
    }
}

/// Parses a literal that is known to be well formed.
pub(crate) fn lit<S: Scalar>(s: &str) -> S {
    S::lit(s).unwrap_or_else(|e| panic!("{e}"))
}
