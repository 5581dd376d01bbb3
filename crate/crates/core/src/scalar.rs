//! Scalar abstraction for measures and widths.
//!
//! Towers, name distributions and covers are generic over [`Weight`]. The
//! exact instantiation uses [`BigRational`] so that repeated cutting never
//! drifts; `f64`/`f32` instantiations exist for quick exploratory runs.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

pub trait Weight: Clone + Debug + PartialOrd + Num + Send + Sync + 'static {
    /// `num / den`; `den` must be nonzero.
    fn from_ratio(num: u64, den: u64) -> Self;

    fn to_f64(&self) -> f64;

    /// Lossless text form used by snapshots and CSV output.
    fn to_text(&self) -> String;

    fn parse_text(s: &str) -> Option<Self>;

    /// Exact value as a rational; `None` for non-finite floats.
    fn to_rational(&self) -> Option<BigRational>;

    /// Nearest value to an exact rational (exact for `BigRational`).
    fn from_rational(r: &BigRational) -> Self;

    fn from_count(n: usize) -> Self {
        Self::from_ratio(n as u64, 1)
    }

    fn is_positive_weight(&self) -> bool {
        *self > Self::zero()
    }

    fn sum<'a, I: IntoIterator<Item = &'a Self>>(items: I) -> Self {
        items.into_iter().fold(Self::zero(), |acc, x| acc + x.clone())
    }
}

impl Weight for BigRational {
    fn from_ratio(num: u64, den: u64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn to_f64(&self) -> f64 {
        // Large numerators and denominators overflow `ToPrimitive` on the
        // ratio itself; scale both down first.
        if let Some(v) = ToPrimitive::to_f64(self) {
            if v.is_finite() {
                return v;
            }
        }
        let n = self.numer();
        let d = self.denom();
        let shift = n.bits().max(d.bits()).saturating_sub(900);
        let n = (n >> shift).to_f64().unwrap_or(f64::NAN);
        let d = (d >> shift).to_f64().unwrap_or(f64::NAN);
        n / d
    }

    fn to_text(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }

    fn parse_text(s: &str) -> Option<Self> {
        let s = s.trim();
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim().parse::<BigInt>().ok()?, d.trim().parse::<BigInt>().ok()?),
            None => (s.parse::<BigInt>().ok()?, BigInt::one()),
        };
        if d.is_zero() || d.is_negative() {
            return None;
        }
        Some(BigRational::new(n, d))
    }

    fn to_rational(&self) -> Option<BigRational> {
        Some(self.clone())
    }

    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }
}

macro_rules! float_weight {
    ($t:ty) => {
        impl Weight for $t {
            fn from_ratio(num: u64, den: u64) -> Self {
                (num as f64 / den as f64) as $t
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }

            fn to_text(&self) -> String {
                format!("{:?}", self)
            }

            fn parse_text(s: &str) -> Option<Self> {
                let s = s.trim();
                match s.split_once('/') {
                    Some((n, d)) => {
                        let d: $t = d.trim().parse().ok()?;
                        (d != 0.0).then_some(n.trim().parse::<$t>().ok()? / d)
                    }
                    None => s.parse().ok(),
                }
            }

            fn to_rational(&self) -> Option<BigRational> {
                BigRational::from_float(*self as f64)
            }

            fn from_rational(r: &BigRational) -> Self {
                Weight::to_f64(r) as $t
            }
        }
    };
}

float_weight!(f64);
float_weight!(f32);

/// Parses a decimal or fraction literal (`"0.1"`, `"1/10"`) into an exact rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some(r) = BigRational::parse_text(s) {
        return Some(r);
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.')?;
    if frac.is_empty() && int.is_empty() {
        return None;
    }
    let digits = format!("{int}{frac}");
    let num: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let den = num_traits::pow(BigInt::from(10u32), frac.len());
    let r = BigRational::new(num, den);
    Some(if neg { -r } else { r })
}

/// Serde adapter writing a rational as text (`"1/10"`) and reading any
/// literal [`parse_rational`] accepts; use with `#[serde(with = ...)]`.
pub mod rational_text {
    use num_rational::BigRational;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    use super::parse_rational;

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).ok_or_else(|| D::Error::custom(format!("not a rational number: {text:?}")))
    }

    /// The same adapter for lists.
    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(v: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for r in v {
                seq.serialize_element(&r.to_string())?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigRational>, D::Error> {
            Vec::<String>::deserialize(d)?
                .into_iter()
                .map(|t| parse_rational(&t).ok_or_else(|| D::Error::custom(format!("not a rational number: {t:?}"))))
                .collect()
        }
    }
}
