use std::fmt;
use std::ops::Add;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A discrete valuation value. The zero element has valuation `Infinite`,
/// so that `|0| = q^{-v(0)} = 0`.
///
/// Variant order makes the derived `Ord` place `Infinite` above every finite value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn is_infinite(self) -> bool {
        matches!(self, Valuation::Infinite)
    }

    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    /// `q^{-v}`, with `0` for the infinite valuation.
    pub fn abs_value(self, q: u32) -> f64 {
        match self {
            Valuation::Finite(v) => (q as f64).powi(-(v as i32)),
            Valuation::Infinite => 0.0,
        }
    }
}

impl From<i64> for Valuation {
    fn from(v: i64) -> Self {
        Valuation::Finite(v)
    }
}

impl Add for Valuation {
    type Output = Valuation;

    fn add(self, rhs: Valuation) -> Valuation {
        match (self, rhs) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a + b),
            _ => Valuation::Infinite,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

// JSON has no infinity, so the sentinel travels as the string "inf".
impl Serialize for Valuation {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Valuation::Finite(v) => s.serialize_i64(*v),
            Valuation::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Valuation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(i64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(Valuation::Finite(v)),
            Repr::Str(s) if s == "inf" => Ok(Valuation::Infinite),
            Repr::Str(s) => Err(serde::de::Error::custom(format!("bad valuation {s:?}"))),
        }
    }
}
