//! Play values in `N ∪ {∞}`.

use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

/// A cost in `N ∪ {∞}`. Player 0 minimizes, Player 1 maximizes; a play is
/// winning for Player 0 exactly when its value is finite.
///
/// The derived order places `Finite(n) < Infinite` for every `n`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Value {
    Finite(u64),
    Infinite,
}

impl Value {
    pub fn is_finite(self) -> bool {
        matches!(self, Value::Finite(_))
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            Value::Finite(n) => Some(n),
            Value::Infinite => None,
        }
    }

    /// Addition with `∞ + x = ∞`.
    pub fn saturating_add(self, rhs: u64) -> Value {
        match self {
            Value::Finite(n) => Value::Finite(n.saturating_add(rhs)),
            Value::Infinite => Value::Infinite,
        }
    }
}

impl From<u64> for Value {
    fn from(n: u64) -> Self {
        Value::Finite(n)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Finite(n) => write!(f, "{n}"),
            Value::Infinite => write!(f, "inf"),
        }
    }
}

// On the wire a value is either a JSON number or the string "inf".
impl Serialize for Value {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::Finite(n) => serializer.serialize_u64(*n),
            Value::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct ValueVisitor;

        impl Visitor<'_> for ValueVisitor {
            type Value = Value;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a non-negative integer or the string \"inf\"")
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Value, E> {
                Ok(Value::Finite(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Value, E> {
                u64::try_from(v)
                    .map(Value::Finite)
                    .map_err(|_| E::custom("negative value"))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Value, E> {
                if v == "inf" {
                    Ok(Value::Infinite)
                } else {
                    Err(E::custom(format!("expected \"inf\", got {v:?}")))
                }
            }
        }

        deserializer.deserialize_any(ValueVisitor)
    }
}
