//! Exact rational scalars and their string encoding.
//!
//! Every coordinate, offset and threshold in the crate is a [`Scalar`], an
//! arbitrary-precision rational kept in lowest terms with a positive
//! denominator. The textual form is `"p/q"` or a plain integer `"p"`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Scalar = num_rational::BigRational;

pub fn int(n: i64) -> Scalar {
    Scalar::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Scalar {
    Scalar::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"p/q"`, `"p"` or a finite decimal such as `"-0.125"`.
pub fn parse(s: &str) -> Result<Scalar> {
    let t = s.trim();
    if t.is_empty() {
        return Err(Error::Parse(s.to_string()));
    }
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| Error::Parse(s.to_string()))?;
        let d: BigInt = d.trim().parse().map_err(|_| Error::Parse(s.to_string()))?;
        if d.is_zero() {
            return Err(Error::Parse(s.to_string()));
        }
        return Ok(Scalar::new(n, d));
    }
    if let Some((whole, frac)) = t.split_once('.') {
        let neg = whole.starts_with('-');
        let digits = format!("{}{}", whole.trim_start_matches(['-', '+']), frac);
        let n: BigInt = digits.parse().map_err(|_| Error::Parse(s.to_string()))?;
        let d = num_traits::pow(BigInt::from(10), frac.len());
        let v = Scalar::new(n, d);
        return Ok(if neg { -v } else { v });
    }
    let n: BigInt = t.parse().map_err(|_| Error::Parse(s.to_string()))?;
    Ok(Scalar::from_integer(n))
}

pub fn format(x: &Scalar) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn to_f64(x: &Scalar) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // Huge numerators or denominators: scale down through the bit lengths.
        let nb = x.numer().bits() as i64;
        let db = x.denom().bits() as i64;
        let shift = (nb.max(db) - 900).max(0) as usize;
        let n = (x.numer() >> shift).to_f64().unwrap_or(0.0);
        let d = (x.denom() >> shift).to_f64().unwrap_or(1.0);
        if d == 0.0 {
            if n.is_sign_negative() {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            }
        } else {
            n / d
        }
    })
}

/// Closest rational with denominator `2^bits` not below `x`.
pub fn dyadic_ceil(x: &Scalar, bits: u32) -> Scalar {
    let scale = BigInt::one() << bits;
    let scaled = x * Scalar::from_integer(scale.clone());
    Scalar::new(scaled.ceil().to_integer(), scale)
}

pub fn from_f64_dyadic(x: f64, bits: u32) -> Scalar {
    let scaled = (x * f64::from(2u32).powi(bits as i32)).round();
    Scalar::new(BigInt::from(scaled as i128), BigInt::one() << bits)
}

/// Exact rational square root when one exists.
pub fn exact_sqrt(x: &Scalar) -> Option<Scalar> {
    if x.is_negative() {
        return None;
    }
    let n = x.numer().sqrt();
    let d = x.denom().sqrt();
    if &(&n * &n) == x.numer() && &(&d * &d) == x.denom() {
        Some(Scalar::new(n, d))
    } else {
        None
    }
}

/// Rational bounds `lo <= sqrt(x) <= hi` with `hi - lo <= 2^-bits / denom`.
/// Both ends coincide when the root is rational.
pub fn sqrt_bounds(x: &Scalar, bits: u32) -> (Scalar, Scalar) {
    if let Some(r) = exact_sqrt(x) {
        return (r.clone(), r);
    }
    // sqrt(a/b) = sqrt(a*b)/b; scale the radicand by 4^bits before the integer root.
    let ab: BigInt = x.numer() * x.denom();
    let scaled = ab << (2 * bits as usize);
    let root = scaled.sqrt();
    let denom = x.denom() << bits as usize;
    let lo = Scalar::new(root.clone(), denom.clone());
    let hi = Scalar::new(root + 1, denom);
    (lo, hi)
}

pub fn abs(x: &Scalar) -> Scalar {
    x.abs()
}

pub fn min<'a>(a: &'a Scalar, b: &'a Scalar) -> &'a Scalar {
    if a <= b {
        a
    } else {
        b
    }
}

pub fn max<'a>(a: &'a Scalar, b: &'a Scalar) -> &'a Scalar {
    if a >= b {
        a
    } else {
        b
    }
}

/// Least common multiple of the denominators.
pub fn common_denominator<'a>(xs: impl IntoIterator<Item = &'a Scalar>) -> BigInt {
    xs.into_iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

pub fn ceil_to_u64(x: &Scalar) -> Option<u64> {
    x.ceil().to_integer().to_u64()
}

/// Serde adapter storing a scalar as its `"p/q"` string.
pub mod serde_scalar {
    use serde::{Deserialize, Deserializer, Serializer};

    use super::Scalar;

    pub fn serialize<S: Serializer>(x: &Scalar, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Scalar, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        super::from_json(&v).map_err(serde::de::Error::custom)
    }
}

pub mod serde_scalar_vec {
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    use super::Scalar;

    pub fn serialize<S: Serializer>(xs: &[Scalar], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(xs.len()))?;
        for x in xs {
            seq.serialize_element(&super::format(x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Scalar>, D::Error> {
        let v = Vec::<serde_json::Value>::deserialize(d)?;
        v.iter()
            .map(|x| super::from_json(x).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// Serde adapter for optional scalars.
pub mod serde_opt_scalar {
    use serde::{Deserialize, Deserializer, Serializer};

    use super::Scalar;

    pub fn serialize<S: Serializer>(x: &Option<Scalar>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(v) => s.serialize_some(&super::format(v)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Scalar>, D::Error> {
        match Option::<serde_json::Value>::deserialize(d)? {
            None | Some(serde_json::Value::Null) => Ok(None),
            Some(v) => super::from_json(&v).map(Some).map_err(serde::de::Error::custom),
        }
    }
}

/// Accepts JSON strings (`"p/q"`, decimals) and JSON integers.
pub fn from_json(v: &serde_json::Value) -> Result<Scalar> {
    match v {
        serde_json::Value::String(s) => parse(s),
        serde_json::Value::Number(n) => parse(&n.to_string()),
        other => Err(Error::Parse(other.to_string())),
    }
}
