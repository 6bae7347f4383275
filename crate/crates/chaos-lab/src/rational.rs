//! Arbitrary-precision rational scalars and normalized circle angles.
//!
//! [`Rational`] is the universal scalar of the crate: heights, radii,
//! rotation angles, thresholds and fractions are all exact rationals kept
//! in lowest terms with a positive denominator. [`Angle`] is a rational
//! normalized to `[0, 1)` with mod-1 arithmetic.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Exact signed rational. Always stored reduced, denominator positive.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(numer: BigInt, denom: BigInt) -> Result<Self> {
        if denom.is_zero() {
            return Err(Error::domain("rational with zero denominator"));
        }
        Ok(Rational(BigRational::new(numer, denom)))
    }

    /// Shorthand for small literals: `Rational::frac(1, 3)`.
    pub fn frac(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        Rational(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn int(value: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(value)))
    }

    pub fn from_bigint(value: BigInt) -> Self {
        Rational(BigRational::from_integer(value))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::domain("reciprocal of zero"));
        }
        Ok(Rational(self.0.recip()))
    }

    /// Largest integer `<= self`.
    pub fn floor_int(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    /// Smallest integer `>= self`.
    pub fn ceil_int(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    /// Value reduced into `[0, 1)`.
    pub fn mod_one(&self) -> Self {
        let f = self.0.floor();
        Rational(&self.0 - f)
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// Decimal expansion with the given number of fractional digits,
    /// rounded half away from zero. Used only for approximate CSV output.
    pub fn to_decimal(&self, digits: u32) -> String {
        let scale = BigInt::from(10u32).pow(digits);
        // round the magnitude, then reattach the sign
        let scaled = self.0.abs() * BigRational::from_integer(scale);
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        let rounded = (scaled + half).floor().to_integer();
        let mag = rounded.to_string();
        let mag = if mag.len() <= digits as usize {
            format!("{}{}", "0".repeat(digits as usize + 1 - mag.len()), mag)
        } else {
            mag
        };
        let split = mag.len() - digits as usize;
        let sign = if self.is_negative() { "-" } else { "" };
        format!("{}{}.{}", sign, &mag[..split], &mag[split..])
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |_| Error::domain(format!("cannot parse rational from {s:?}"));
        match s.split_once('/') {
            Some((n, d)) => {
                let numer = BigInt::from_str(n.trim()).map_err(bad)?;
                let denom = BigInt::from_str(d.trim()).map_err(bad)?;
                Rational::new(numer, denom)
            }
            None => {
                let numer = BigInt::from_str(s.trim()).map_err(bad)?;
                Ok(Rational::from_bigint(numer))
            }
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl From<i64> for Rational {
    fn from(value: i64) -> Self {
        Rational::int(value)
    }
}

impl From<BigInt> for Rational {
    fn from(value: BigInt) -> Self {
        Rational::from_bigint(value)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((self.0).$method(rhs.0))
            }
        }
        impl $trait<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational((self.0).$method(&rhs.0))
            }
        }
        impl $trait<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((&self.0).$method(rhs.0))
            }
        }
        impl $trait<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

/// A point of the unit circle, stored as a rational in `[0, 1)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Angle(Rational);

impl Angle {
    /// Reduces any rational mod 1.
    pub fn new(value: Rational) -> Self {
        Angle(value.mod_one())
    }

    pub fn zero() -> Self {
        Angle(Rational::zero())
    }

    pub fn frac(numer: i64, denom: i64) -> Self {
        Angle::new(Rational::frac(numer, denom))
    }

    pub fn value(&self) -> &Rational {
        &self.0
    }

    pub fn rotate(&self, by: &Rational) -> Angle {
        Angle::new(&self.0 + by)
    }

    /// Circle metric `min(|a-b|, 1-|a-b|)`, always in `[0, 1/2]`.
    pub fn dist(&self, other: &Angle) -> Rational {
        let d = (&self.0 - &other.0).abs();
        let wrap = Rational::one() - &d;
        d.min(wrap)
    }
}

/// Free-function form of the circle metric.
pub fn circle_dist(a: &Angle, b: &Angle) -> Rational {
    a.dist(b)
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<Rational> for Angle {
    fn from(value: Rational) -> Self {
        Angle::new(value)
    }
}

impl Serialize for Angle {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        Ok(Angle::new(Rational::deserialize(deserializer)?))
    }
}
