//! Exact rational helpers.
//!
//! Densities and bounds are [`BigRational`] values. They are always rendered as
//! `"p/q"` strings (including `"0/1"` and `"1/1"`), never as floats.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

pub type ExactRational = BigRational;

pub fn ratio(numer: u64, denom: u64) -> ExactRational {
    assert!(denom != 0, "zero denominator");
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn ratio_big(numer: BigUint, denom: BigUint) -> ExactRational {
    assert!(!denom.is_zero(), "zero denominator");
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(n: u64) -> ExactRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn zero() -> ExactRational {
    BigRational::zero()
}

pub fn one() -> ExactRational {
    BigRational::one()
}

/// `"p/q"` in lowest terms, denominator always present.
pub fn format(value: &ExactRational) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

pub fn parse(text: &str) -> Option<ExactRational> {
    let text = text.trim();
    let (p, q) = match text.split_once('/') {
        Some((p, q)) => (p.trim().parse::<BigInt>().ok()?, q.trim().parse::<BigInt>().ok()?),
        None => (text.parse::<BigInt>().ok()?, BigInt::one()),
    };
    if q.is_zero() {
        return None;
    }
    Some(BigRational::new(p, q))
}

/// Floating approximation that survives numerators and denominators far
/// beyond `f64` range.
pub fn to_f64(value: &ExactRational) -> f64 {
    if let Some(v) = value.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    let n = value.numer();
    let d = value.denom();
    let shift = n.bits().max(d.bits()).saturating_sub(900);
    let n = (n >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (d >> shift).to_f64().unwrap_or(f64::NAN);
    n / d
}

/// Serde adapter writing rationals as `"p/q"`.
pub mod serde_ratio {
    use super::*;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &ExactRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ExactRational, D::Error> {
        let text = String::deserialize(d)?;
        parse(&text).ok_or_else(|| D::Error::custom(format!("bad rational {text:?}")))
    }
}

/// Serde adapter for `Option<ExactRational>`.
pub mod serde_ratio_opt {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Option<ExactRational>, s: S) -> Result<S::Ok, S::Error> {
        match value {
            Some(v) => s.serialize_some(&format(v)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<ExactRational>, D::Error> {
        let text: Option<String> = Option::deserialize(d)?;
        Ok(text.and_then(|t| parse(&t)))
    }
}

/// Serde adapter writing big integers as decimal strings.
pub mod serde_biguint {
    use num_bigint::BigUint;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&value.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(D::Error::custom)
    }
}
