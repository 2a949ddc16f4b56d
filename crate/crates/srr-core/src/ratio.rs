//! Exact rational arithmetic helpers.
//!
//! All numeric computation in this crate is exact: values are
//! [`Rational`] (arbitrary-precision `p/q`), never floating point.
//! This module adds the small pieces the solver and the JSON layer
//! need on top of [`num_rational::BigRational`]: integer conversions,
//! exact ceilings, and the `"p/q"` text form used everywhere a
//! rational is rendered.
//!
//! # Example
//!
//! ```
//! use srr_core::ratio::{self, Rational};
//!
//! let r = ratio::parse_rational("19/4").unwrap();
//! assert_eq!(ratio::ceil_to_u64(&r), 5);
//! assert_eq!(ratio::format_rational(&r), "19/4");
//! assert_eq!(ratio::format_rational(&ratio::int(7)), "7");
//! ```

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Exact rational number used throughout the crate.
pub type Rational = num_rational::BigRational;

/// The rational `n`.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// The rational `n`.
pub fn uint(n: u64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// The rational `num/den`. `den` must be nonzero.
pub fn frac(num: i64, den: i64) -> Rational {
    assert!(den != 0, "zero denominator");
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Whether `r` is an integer.
pub fn is_integer(r: &Rational) -> bool {
    r.is_integer()
}

/// `r` as a `u64` if it is an integer in range.
pub fn to_u64(r: &Rational) -> Option<u64> {
    if r.is_integer() {
        r.numer().to_u64()
    } else {
        None
    }
}

/// Exact ceiling of a nonnegative rational, as `u64`.
///
/// Panics if `r` is negative or the ceiling overflows `u64`; callers
/// only apply this to sums of nonnegative inputs at in-range scale.
pub fn ceil_to_u64(r: &Rational) -> u64 {
    assert!(!r.is_negative(), "ceil_to_u64 needs a nonnegative input");
    r.ceil()
        .numer()
        .to_u64()
        .expect("ceiling exceeds u64 range")
}

/// `ceil(num / den)` over nonnegative integers. `den` must be nonzero.
pub fn ceil_div_u64(num: u64, den: u64) -> u64 {
    assert!(den != 0, "zero denominator");
    num.div_ceil(den)
}

/// Canonical text form: `"p"` for integers, `"p/q"` otherwise, with a
/// leading `-` on negative values.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parse the canonical text form accepted by [`format_rational`]:
/// an optional sign, an integer, and an optional `/denominator`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::InvalidInput(format!("malformed rational {s:?}, expected \"p\" or \"p/q\""));
    let (numer, denom) = match s.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (s, None),
    };
    let numer: BigInt = numer.trim().parse().map_err(|_| bad())?;
    let denom: BigInt = match denom {
        Some(d) => d.trim().parse().map_err(|_| bad())?,
        None => BigInt::from(1),
    };
    if denom.is_zero() {
        return Err(Error::InvalidInput(format!("zero denominator in {s:?}")));
    }
    Ok(Rational::new(numer, denom))
}

/// Serde adapter giving rationals their JSON form: integers serialize
/// as JSON numbers, everything else as a `"p/q"` string. Deserialation
/// accepts numbers, `"p"`, and `"p/q"`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct JsonRational(pub Rational);

impl Serialize for JsonRational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_integer() {
            if let Some(n) = self.0.numer().to_i64() {
                return serializer.serialize_i64(n);
            }
        }
        serializer.serialize_str(&format_rational(&self.0))
    }
}

impl<'de> Deserialize<'de> for JsonRational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let value = serde_json::Value::deserialize(deserializer)?;
        let rational = match &value {
            serde_json::Value::Number(n) => n
                .as_i64()
                .map(int)
                .or_else(|| n.as_u64().map(uint))
                .ok_or_else(|| D::Error::custom("rational must be an integer or \"p/q\""))?,
            serde_json::Value::String(s) => {
                parse_rational(s).map_err(|e| D::Error::custom(e.to_string()))?
            }
            other => {
                return Err(D::Error::custom(format!(
                    "rational must be an integer or \"p/q\" string, got {other}"
                )))
            }
        };
        Ok(JsonRational(rational))
    }
}
