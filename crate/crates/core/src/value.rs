//! Exact extended-integer values used as diagram terminals and game payoffs.

use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

/// An exact integer or the distinguished `Infinity` symbol.
///
/// `Finite(_) < Infinity` for every finite value. `Infinity` absorbs under
/// addition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Finite(i64),
    Infinity,
}

impl Value {
    pub const ZERO: Value = Value::Finite(0);
    pub const ONE: Value = Value::Finite(1);

    pub fn is_finite(self) -> bool {
        matches!(self, Value::Finite(_))
    }

    pub fn finite(self) -> Option<i64> {
        match self {
            Value::Finite(v) => Some(v),
            Value::Infinity => None,
        }
    }

    /// Saturating addition; `Infinity` absorbs.
    pub fn plus(self, other: Value) -> Value {
        match (self, other) {
            (Value::Finite(a), Value::Finite(b)) => Value::Finite(a.saturating_add(b)),
            _ => Value::Infinity,
        }
    }

    /// Multiplication with `0 * Infinity = 0`.
    pub fn times(self, other: Value) -> Value {
        match (self, other) {
            (Value::Finite(a), Value::Finite(b)) => Value::Finite(a.saturating_mul(b)),
            (Value::Finite(0), Value::Infinity) | (Value::Infinity, Value::Finite(0)) => Value::ZERO,
            _ => Value::Infinity,
        }
    }

    pub fn add_cost(self, cost: u64) -> Value {
        self.plus(Value::Finite(cost as i64))
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Finite(v)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Finite(v) => write!(f, "{v}"),
            Value::Infinity => write!(f, "inf"),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::Finite(v) => s.serialize_i64(*v),
            Value::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct ValueVisitor;
        impl Visitor<'_> for ValueVisitor {
            type Value = Value;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an integer or \"inf\"")
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Value, E> {
                Ok(Value::Finite(v))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Value, E> {
                i64::try_from(v).map(Value::Finite).map_err(|_| E::custom("value out of range"))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Value, E> {
                if v == "inf" {
                    Ok(Value::Infinity)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }
        }
        d.deserialize_any(ValueVisitor)
    }
}
