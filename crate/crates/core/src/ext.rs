//! Values in `]-inf, +inf]`.
//!
//! `+inf` is an explicit tag, never an IEEE infinity that slipped out of an
//! overflow. `-inf` has no representation: any operation that would produce
//! it is an error.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    PosInf,
}

pub use ExtReal::PosInf;

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal::Finite(0.0);

    /// Wraps a finite `f64`, rejecting NaN and IEEE infinities.
    pub fn finite(value: f64) -> Result<Self> {
        if value.is_finite() {
            Ok(ExtReal::Finite(value))
        } else {
            Err(Error::NumericalBlowup {
                context: "ExtReal::finite".into(),
                value,
            })
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn is_inf(self) -> bool {
        matches!(self, ExtReal::PosInf)
    }

    pub fn as_finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::PosInf => None,
        }
    }

    /// Lossy view for plotting and CSV; `+inf` maps to `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::Finite(v) => v,
            ExtReal::PosInf => f64::INFINITY,
        }
    }

    /// `self - rhs`. Subtracting `+inf` is undefined here: `inf - inf` has no
    /// value and `a - inf` would be `-inf`.
    pub fn checked_sub(self, rhs: ExtReal) -> Result<ExtReal> {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => Ok(ExtReal::Finite(a - b)),
            (ExtReal::PosInf, ExtReal::Finite(_)) => Ok(ExtReal::PosInf),
            (ExtReal::PosInf, ExtReal::PosInf) => Err(Error::UndefinedArithmetic("inf - inf")),
            (ExtReal::Finite(_), ExtReal::PosInf) => Err(Error::UndefinedArithmetic("finite - inf")),
        }
    }

    /// Multiplication by a real scalar. `+inf` is absorbing for `lambda >= 0`
    /// (including `0 * inf = inf`, which keeps the effective domain).
    pub fn scale(self, lambda: f64) -> Result<ExtReal> {
        match self {
            ExtReal::Finite(v) => Ok(ExtReal::Finite(lambda * v)),
            ExtReal::PosInf if lambda >= 0.0 => Ok(ExtReal::PosInf),
            ExtReal::PosInf => Err(Error::UndefinedArithmetic("negative * inf")),
        }
    }

    /// Pointwise product of two extended-valued functions: `+inf` outside the
    /// intersection of the effective domains.
    pub fn dom_mul(self, rhs: ExtReal) -> ExtReal {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a * b),
            _ => ExtReal::PosInf,
        }
    }

    pub fn abs(self) -> ExtReal {
        match self {
            ExtReal::Finite(v) => ExtReal::Finite(v.abs()),
            ExtReal::PosInf => ExtReal::PosInf,
        }
    }

    pub fn min(self, other: ExtReal) -> ExtReal {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: ExtReal) -> ExtReal {
        if other > self {
            other
        } else {
            self
        }
    }

    /// `|self - other|` with the convention `|inf - inf| = 0`.
    pub fn gap(self, other: ExtReal) -> ExtReal {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite((a - b).abs()),
            (ExtReal::PosInf, ExtReal::PosInf) => ExtReal::ZERO,
            _ => ExtReal::PosInf,
        }
    }
}

impl From<f64> for ExtReal {
    /// `f64::INFINITY` maps to `+inf`. Panics on NaN or `-inf`; use
    /// [`ExtReal::finite`] for values that come out of a computation.
    fn from(v: f64) -> Self {
        assert!(!v.is_nan() && v != f64::NEG_INFINITY, "not an element of ]-inf, inf]: {v}");
        if v == f64::INFINITY {
            ExtReal::PosInf
        } else {
            ExtReal::Finite(v)
        }
    }
}

impl Add for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: ExtReal) -> ExtReal {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + b),
            _ => ExtReal::PosInf,
        }
    }
}

impl Add<f64> for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: f64) -> ExtReal {
        self + ExtReal::Finite(rhs)
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.partial_cmp(b),
            (ExtReal::Finite(_), ExtReal::PosInf) => Some(Ordering::Less),
            (ExtReal::PosInf, ExtReal::Finite(_)) => Some(Ordering::Greater),
            (ExtReal::PosInf, ExtReal::PosInf) => Some(Ordering::Equal),
        }
    }
}

impl PartialEq<f64> for ExtReal {
    fn eq(&self, other: &f64) -> bool {
        matches!(self, ExtReal::Finite(v) if v == other)
    }
}

impl PartialOrd<f64> for ExtReal {
    fn partial_cmp(&self, other: &f64) -> Option<Ordering> {
        self.partial_cmp(&ExtReal::Finite(*other))
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::PosInf => f.write_str("inf"),
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(v) => s.serialize_f64(*v),
            ExtReal::PosInf => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct ExtVisitor;

        impl Visitor<'_> for ExtVisitor {
            type Value = ExtReal;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a finite number or the string \"inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<ExtReal, E> {
                ExtReal::finite(v).map_err(E::custom)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<ExtReal, E> {
                Ok(ExtReal::Finite(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<ExtReal, E> {
                Ok(ExtReal::Finite(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<ExtReal, E> {
                match v {
                    "inf" | "+inf" => Ok(ExtReal::PosInf),
                    other => other
                        .parse::<f64>()
                        .map_err(E::custom)
                        .and_then(|x| ExtReal::finite(x).map_err(E::custom)),
                }
            }
        }

        d.deserialize_any(ExtVisitor)
    }
}
