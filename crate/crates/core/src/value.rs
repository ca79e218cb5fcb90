//! Cell values: text, exact decimal numbers, and null.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use bigdecimal::BigDecimal;
use serde::{Deserialize, Serialize};

/// An exact decimal number. Always stored normalized, so structural
/// equality and hashing agree with numeric equality (`1.50 == 1.5`).
#[allow(clippy::derived_hash_with_manual_eq)]
#[derive(Debug, Clone, Eq, Hash, PartialOrd, Ord)]
pub struct Decimal(Arc<BigDecimal>);

impl PartialEq for Decimal {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl Decimal {
    /// Parses the restricted decimal syntax accepted in tables: an optional
    /// sign, digits, and an optional fractional part. No exponents, no
    /// surrounding whitespace.
    pub fn parse_strict(s: &str) -> Option<Decimal> {
        let body = s.strip_prefix(['+', '-']).unwrap_or(s);
        let (int, frac) = match body.split_once('.') {
            Some((i, f)) => (i, Some(f)),
            None => (body, None),
        };
        let digits = |p: &str| p.bytes().all(|b| b.is_ascii_digit());
        let ok = digits(int)
            && frac.is_none_or(digits)
            && !(int.is_empty() && frac.is_none_or(str::is_empty));
        if !ok {
            return None;
        }
        BigDecimal::from_str(s).ok().map(Decimal::from)
    }

    pub fn from_i64(v: i64) -> Decimal {
        Decimal::from(BigDecimal::from(v))
    }
}

impl From<BigDecimal> for Decimal {
    fn from(d: BigDecimal) -> Self {
        Decimal(Arc::new(d.normalized()))
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.to_plain_string())
    }
}

/// A single table cell value.
///
/// The derived equality is structural (`Null == Null`), which is what table
/// diffs and repair outputs need. Predicate semantics, where null compares
/// unequal to everything, live in [`crate::dc`].
#[allow(clippy::derived_hash_with_manual_eq)]
#[derive(Debug, Clone, Eq, Hash, Default)]
pub enum Value {
    #[default]
    Null,
    Number(Decimal),
    Text(Arc<str>),
}

impl Value {
    pub fn text(s: impl AsRef<str>) -> Value {
        Value::Text(Arc::from(s.as_ref()))
    }

    pub fn number(n: i64) -> Value {
        Value::Number(Decimal::from_i64(n))
    }

    /// Interprets a raw CSV field: empty is null, a valid decimal is a
    /// number, anything else is text.
    pub fn from_field(field: &str) -> Value {
        if field.is_empty() {
            Value::Null
        } else if let Some(d) = Decimal::parse_strict(field) {
            Value::Number(d)
        } else {
            Value::text(field)
        }
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Value::Null)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Value::Null => "null",
            Value::Number(_) => "number",
            Value::Text(_) => "text",
        }
    }

    /// The CSV field rendering; null becomes the empty field.
    pub fn to_field(&self) -> String {
        match self {
            Value::Null => String::new(),
            Value::Number(d) => d.to_string(),
            Value::Text(s) => s.to_string(),
        }
    }
}

/// Canonical order: null, then numbers ascending, then text in code point
/// order. Used for argmax tie-breaking and for sorted distributions.
impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Value::Null, Value::Null) => true,
            (Value::Number(a), Value::Number(b)) => a == b,
            (Value::Text(a), Value::Text(b)) => Arc::ptr_eq(a, b) || a == b,
            _ => false,
        }
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        fn rank(v: &Value) -> u8 {
            match v {
                Value::Null => 0,
                Value::Number(_) => 1,
                Value::Text(_) => 2,
            }
        }
        match (self, other) {
            (Value::Number(a), Value::Number(b)) => a.cmp(b),
            (Value::Text(a), Value::Text(b)) => a.cmp(b),
            _ => rank(self).cmp(&rank(other)),
        }
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Null => f.write_str("null"),
            Value::Number(d) => write!(f, "{d}"),
            Value::Text(s) => write!(f, "{s:?}"),
        }
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::text(s)
    }
}

impl From<i64> for Value {
    fn from(n: i64) -> Self {
        Value::number(n)
    }
}

// Wire form: JSON null, JSON number (kept exact), or JSON string.
impl Serialize for Value {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::Null => ser.serialize_none(),
            Value::Text(s) => ser.serialize_str(s),
            Value::Number(d) => {
                let n = serde_json::Number::from_str(&d.to_string())
                    .map_err(serde::ser::Error::custom)?;
                n.serialize(ser)
            }
        }
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        match serde_json::Value::deserialize(de)? {
            serde_json::Value::Null => Ok(Value::Null),
            serde_json::Value::String(s) => Ok(Value::text(s)),
            serde_json::Value::Number(n) => BigDecimal::from_str(&n.to_string())
                .map(|d| Value::Number(d.into()))
                .map_err(D::Error::custom),
            other => Err(D::Error::custom(format!(
                "expected null, number or string cell value, got {other}"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_classification() {
        assert_eq!(Value::from_field(""), Value::Null);
        assert_eq!(Value::from_field("2019"), Value::number(2019));
        assert_eq!(Value::from_field("-1.50"), Value::from_field("-1.5"));
        assert!(matches!(Value::from_field(".5"), Value::Number(_)));
        assert!(matches!(Value::from_field("5."), Value::Number(_)));
        for t in ["1e3", " 1", ".", "-", "1.2.3", "Madrid", "+"] {
            assert!(matches!(Value::from_field(t), Value::Text(_)), "{t}");
        }
    }

    #[test]
    fn numbers_never_equal_text() {
        assert_ne!(Value::number(1), Value::text("1"));
    }

    #[test]
    fn canonical_order_puts_numbers_before_text() {
        let mut vs = vec![
            Value::text("b"),
            Value::number(10),
            Value::text("a"),
            Value::number(2),
        ];
        vs.sort();
        assert_eq!(
            vs,
            vec![
                Value::number(2),
                Value::number(10),
                Value::text("a"),
                Value::text("b")
            ]
        );
        assert!(Value::text("España") < Value::text("Spain"));
    }

    #[test]
    fn plain_rendering() {
        assert_eq!(Value::from_field("1000").to_field(), "1000");
        assert_eq!(Value::from_field("0.0100").to_field(), "0.01");
    }

    #[test]
    fn json_round_trip_keeps_numbers_exact() {
        let vals = vec![
            Value::Null,
            Value::from_field("12345678901234567890.000000000001"),
            Value::text("x"),
        ];
        let s = serde_json::to_string(&vals).unwrap();
        assert_eq!(s, r#"[null,12345678901234567890.000000000001,"x"]"#);
        let back: Vec<Value> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, vals);
    }
}
