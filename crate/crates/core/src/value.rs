//! Property values.
//!
//! Integers, rationals and clock times share one numeric domain when they
//! appear inside constraints; outside of constraints a value keeps its tag.

use std::cmp::Ordering;
use std::fmt;

use num_rational::Ratio;
use num_traits::{Signed, Zero};

/// Exact rational number used by the constraint store.
pub type Rational = Ratio<i128>;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Int(i64),
    Rational(Rational),
    Text(String),
    /// Minutes since midnight.
    Time(u32),
    Bool(bool),
}

impl Value {
    pub fn text(s: impl Into<String>) -> Self {
        Value::Text(s.into())
    }

    /// Clock time from hours and minutes.
    pub fn hm(hours: u32, minutes: u32) -> Self {
        Value::Time(hours * 60 + minutes)
    }

    /// Numeric view, if the value belongs to the numeric domain.
    pub fn as_number(&self) -> Option<Rational> {
        match self {
            Value::Int(i) => Some(Rational::from_integer(*i as i128)),
            Value::Rational(r) => Some(*r),
            Value::Time(t) => Some(Rational::from_integer(*t as i128)),
            Value::Text(_) | Value::Bool(_) => None,
        }
    }

    /// Canonical value for a number: integral numbers become `Int`.
    pub fn from_number(r: Rational) -> Self {
        if r.is_integer() {
            let n = *r.numer();
            if let Ok(i) = i64::try_from(n) {
                return Value::Int(i);
            }
        }
        Value::Rational(r)
    }

    pub fn is_numeric(&self) -> bool {
        self.as_number().is_some()
    }

    /// Equality inside constraints: numeric tags are unified.
    pub fn semantic_eq(&self, other: &Value) -> bool {
        match (self.as_number(), other.as_number()) {
            (Some(a), Some(b)) => a == b,
            (None, None) => self == other,
            _ => false,
        }
    }

    /// Ordering inside constraints. Values of different sorts are unordered.
    pub fn semantic_cmp(&self, other: &Value) -> Option<Ordering> {
        match (self, other) {
            (Value::Text(a), Value::Text(b)) => Some(a.cmp(b)),
            (Value::Bool(a), Value::Bool(b)) => Some(a.cmp(b)),
            _ => match (self.as_number(), other.as_number()) {
                (Some(a), Some(b)) => Some(a.cmp(&b)),
                _ => None,
            },
        }
    }
}

pub(crate) fn fmt_rational(r: &Rational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if r.is_integer() {
        write!(f, "{}", r.numer())
    } else if r.is_negative() {
        write!(f, "-{}/{}", r.numer().abs(), r.denom())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

pub(crate) fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Rational(r) => {
                if r.is_zero() {
                    write!(f, "0")
                } else {
                    fmt_rational(r, f)
                }
            }
            Value::Text(s) => f.write_str(&quote(s)),
            Value::Time(t) => write!(f, "{}:{:02}", t / 60, t % 60),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numeric_tags_unify_in_constraints() {
        assert!(Value::Int(540).semantic_eq(&Value::hm(9, 0)));
        assert_ne!(Value::Int(540), Value::hm(9, 0));
        assert!(!Value::text("540").semantic_eq(&Value::Int(540)));
        assert_eq!(Value::Int(3).semantic_cmp(&Value::text("a")), None);
    }

    #[test]
    fn display_forms() {
        assert_eq!(Value::hm(9, 5).to_string(), "9:05");
        assert_eq!(Value::Rational(Rational::new(-3, 4)).to_string(), "-3/4");
        assert_eq!(Value::text("a\"b").to_string(), "\"a\\\"b\"");
        assert_eq!(Value::from_number(Rational::new(6, 3)), Value::Int(2));
    }
}
