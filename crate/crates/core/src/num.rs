//! Scalar abstraction shared by the LP layer.
//!
//! The simplex and branch-and-bound code is written once against [`Scalar`]
//! and instantiated for `f64`, `f32` and exact big rationals. Floating-point
//! scalars carry tolerances; the rational instantiation uses exact zero tests,
//! which makes it usable as an independent check of the floating-point path on
//! small models.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};

/// Numeric type the LP solver can pivot on.
pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Num + Signed + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Values with magnitude at or below this are treated as zero when
    /// choosing pivots and testing optimality.
    fn pivot_tolerance() -> Self;

    /// Slack allowed when deciding phase-one feasibility.
    fn feasibility_tolerance() -> Self;

    /// `true` if arithmetic is exact and tolerances are zero.
    fn is_exact() -> bool;

    /// Flushes round-off residue to exact zero. No-op for exact types.
    fn flush(&mut self);

    /// Lossless where possible; rationals convert `f64` exactly.
    fn from_f64_value(v: f64) -> Self;

    fn to_f64_value(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Distance of `self` from the nearest integer.
    fn fractionality(&self) -> Self;
}

impl Scalar for f64 {
    fn pivot_tolerance() -> Self {
        1e-7
    }

    fn feasibility_tolerance() -> Self {
        1e-7
    }

    fn is_exact() -> bool {
        false
    }

    #[inline]
    fn flush(&mut self) {
        if self.abs() < 1e-12 {
            *self = 0.0;
        }
    }

    fn from_f64_value(v: f64) -> Self {
        v
    }

    fn fractionality(&self) -> Self {
        (self - self.round()).abs()
    }
}

impl Scalar for f32 {
    fn pivot_tolerance() -> Self {
        1e-5
    }

    fn feasibility_tolerance() -> Self {
        1e-4
    }

    fn is_exact() -> bool {
        false
    }

    #[inline]
    fn flush(&mut self) {
        if self.abs() < 1e-7 {
            *self = 0.0;
        }
    }

    fn from_f64_value(v: f64) -> Self {
        v as f32
    }

    fn fractionality(&self) -> Self {
        (self - self.round()).abs()
    }
}

impl Scalar for BigRational {
    fn pivot_tolerance() -> Self {
        BigRational::zero()
    }

    fn feasibility_tolerance() -> Self {
        BigRational::zero()
    }

    fn is_exact() -> bool {
        true
    }

    fn flush(&mut self) {}

    fn from_f64_value(v: f64) -> Self {
        BigRational::from_float(v).expect("finite value")
    }

    fn fractionality(&self) -> Self {
        let down = self.floor();
        let up = self.ceil();
        let a = self - &down;
        let b = &up - self;
        if a < b {
            a
        } else {
            b
        }
    }
}

/// Builds an exact rational `num / den`.
pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}
