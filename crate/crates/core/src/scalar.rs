//! Numeric backends.
//!
//! Every distribution, weight grid and iteration is generic over [`Scalar`].
//! Two backends exist: exact rationals ([`Rational`]) and `f64`. Spectral
//! analysis always runs on rationals; floating values are lifted exactly
//! (every finite `f64` is a dyadic rational).

use std::fmt::Debug;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};

/// Arbitrary-precision rational number.
pub type Rational = BigRational;

/// Absolute tolerance on the total mass of floating-point distributions.
pub const FLOAT_NORMALIZATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Backend {
    Exact,
    Float,
}

impl Backend {
    pub fn as_str(self) -> &'static str {
        match self {
            Backend::Exact => "exact",
            Backend::Float => "float",
        }
    }
}

impl FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exact" => Ok(Backend::Exact),
            "float" => Ok(Backend::Float),
            other => Err(format!(
                "unknown backend `{other}` (expected `exact` or `float`)"
            )),
        }
    }
}

pub trait Scalar: Clone + Debug + PartialEq + PartialOrd + Signed + Send + Sync + 'static {
    const BACKEND: Backend;

    fn from_rational(value: &Rational) -> Self;

    /// Exact rational value. `None` for non-finite floats.
    fn to_rational(&self) -> Option<Rational>;

    fn to_f64(&self) -> f64;

    fn is_finite(&self) -> bool;

    /// Whether `total` counts as a unit mass for this backend.
    fn is_unit_total(total: &Self) -> bool;

    /// Entry equality used for cycle detection: exact equality for rationals,
    /// `|a - b| <= tol` for floats.
    fn matches(&self, other: &Self, tol: f64) -> bool;

    fn from_i64(value: i64) -> Self {
        Self::from_rational(&Rational::from_integer(BigInt::from(value)))
    }
}

impl Scalar for Rational {
    const BACKEND: Backend = Backend::Exact;

    fn from_rational(value: &Rational) -> Self {
        value.clone()
    }

    fn to_rational(&self) -> Option<Rational> {
        Some(self.clone())
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn is_finite(&self) -> bool {
        true
    }

    fn is_unit_total(total: &Self) -> bool {
        total.is_one()
    }

    fn matches(&self, other: &Self, _tol: f64) -> bool {
        self == other
    }
}

impl Scalar for f64 {
    const BACKEND: Backend = Backend::Float;

    fn from_rational(value: &Rational) -> Self {
        ToPrimitive::to_f64(value).unwrap_or(f64::NAN)
    }

    fn to_rational(&self) -> Option<Rational> {
        Rational::from_float(*self)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }

    fn is_unit_total(total: &Self) -> bool {
        (total - 1.0).abs() <= FLOAT_NORMALIZATION_TOL
    }

    fn matches(&self, other: &Self, tol: f64) -> bool {
        (self - other).abs() <= tol
    }
}

/// `|a - b|` as an `f64`, computed in the backend's own arithmetic first.
pub fn abs_diff<T: Scalar>(a: &T, b: &T) -> f64 {
    (a.clone() - b.clone()).abs().to_f64()
}

pub fn sum<'a, T: Scalar>(values: impl IntoIterator<Item = &'a T>) -> T {
    values.into_iter().fold(T::zero(), |acc, v| acc + v.clone())
}

#[cfg(test)]
pub(crate) fn rational(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_lift_is_exact() {
        let r = 0.25f64.to_rational().unwrap();
        assert_eq!(r, rational(1, 4));
        assert!(f64::NAN.to_rational().is_none());
    }

    #[test]
    fn unit_totals() {
        assert!(Rational::is_unit_total(&rational(3, 3)));
        assert!(!Rational::is_unit_total(&rational(999_999, 1_000_000)));
        assert!(f64::is_unit_total(&(1.0 + 1e-13)));
        assert!(!f64::is_unit_total(&(1.0 + 1e-10)));
    }

    #[test]
    fn backend_parse() {
        assert_eq!("Exact".parse::<Backend>().unwrap(), Backend::Exact);
        assert_eq!("float".parse::<Backend>().unwrap(), Backend::Float);
        assert!("double".parse::<Backend>().is_err());
    }
}
