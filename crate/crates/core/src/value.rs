//! Attribute value types and their lexical forms.
//!
//! Lexical rules shared by every entry point that accepts text for a typed
//! attribute (form answers, data-administration results, fixture files):
//!
//! - integer: optional sign followed by ASCII digits
//! - float: optional sign, digits, optionally `.` and more digits
//! - date: ISO-8601 calendar date `YYYY-MM-DD`
//! - boolean: `true` or `false` (forms use checkbox presence instead)
//! - string: anything

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The closed set of attribute types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueType {
    String,
    Integer,
    Float,
    Boolean,
    Date,
}

impl ValueType {
    pub const ALL: [ValueType; 5] = [
        ValueType::String,
        ValueType::Integer,
        ValueType::Float,
        ValueType::Boolean,
        ValueType::Date,
    ];

    /// `boolean` and `date` are extensions over the string/integer/float
    /// types used by the original rule set.
    pub fn is_extension(self) -> bool {
        matches!(self, ValueType::Boolean | ValueType::Date)
    }

    /// Element name used in the canonical XML (`fm:String`, `fm:Integer`, ...).
    pub fn element_name(self) -> &'static str {
        match self {
            ValueType::String => "String",
            ValueType::Integer => "Integer",
            ValueType::Float => "Float",
            ValueType::Boolean => "Boolean",
            ValueType::Date => "Date",
        }
    }

    pub fn from_element_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.element_name() == name)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ValueType::String => "string",
            ValueType::Integer => "integer",
            ValueType::Float => "float",
            ValueType::Boolean => "boolean",
            ValueType::Date => "date",
        }
    }
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ValueType {
    type Err = LexicalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| LexicalError {
                value_type: ValueType::String,
                text: s.to_string(),
                reason: "unknown value type",
            })
    }
}

/// A typed attribute value.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    String(String),
    Integer(i64),
    Float(f64),
    Boolean(bool),
    Date(NaiveDate),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("'{text}' is not a valid {value_type}: {reason}")]
pub struct LexicalError {
    pub value_type: ValueType,
    pub text: String,
    pub reason: &'static str,
}

impl Value {
    pub fn value_type(&self) -> ValueType {
        match self {
            Value::String(_) => ValueType::String,
            Value::Integer(_) => ValueType::Integer,
            Value::Float(_) => ValueType::Float,
            Value::Boolean(_) => ValueType::Boolean,
            Value::Date(_) => ValueType::Date,
        }
    }

    /// Parses `text` according to the lexical rules of `ty`.
    pub fn parse(ty: ValueType, text: &str) -> Result<Value, LexicalError> {
        let err = |reason| LexicalError {
            value_type: ty,
            text: text.to_string(),
            reason,
        };
        match ty {
            ValueType::String => Ok(Value::String(text.to_string())),
            ValueType::Integer => {
                let digits = text.strip_prefix(['+', '-']).unwrap_or(text);
                if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                    return Err(err("expected an optional sign followed by digits"));
                }
                text.parse::<i64>()
                    .map(Value::Integer)
                    .map_err(|_| err("out of range"))
            }
            ValueType::Float => {
                let unsigned = text.strip_prefix(['+', '-']).unwrap_or(text);
                let (int_part, frac_part) = match unsigned.split_once('.') {
                    Some((i, f)) => (i, Some(f)),
                    None => (unsigned, None),
                };
                let all_digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
                if !all_digits(int_part) || frac_part.is_some_and(|f| !all_digits(f)) {
                    return Err(err("expected a decimal number using '.'"));
                }
                text.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .map(Value::Float)
                    .ok_or_else(|| err("out of range"))
            }
            ValueType::Boolean => match text {
                "true" => Ok(Value::Boolean(true)),
                "false" => Ok(Value::Boolean(false)),
                _ => Err(err("expected 'true' or 'false'")),
            },
            ValueType::Date => {
                let b = text.as_bytes();
                let shape_ok = b.len() == 10
                    && b[4] == b'-'
                    && b[7] == b'-'
                    && b.iter()
                        .enumerate()
                        .all(|(i, c)| i == 4 || i == 7 || c.is_ascii_digit());
                if !shape_ok {
                    return Err(err("expected YYYY-MM-DD"));
                }
                NaiveDate::parse_from_str(text, "%Y-%m-%d")
                    .map(Value::Date)
                    .map_err(|_| err("not a calendar date"))
            }
        }
    }

    /// Canonical lexical form; `Value::parse(ty, &v.to_lexical()) == Ok(v)`.
    pub fn to_lexical(&self) -> String {
        match self {
            Value::String(s) => s.clone(),
            Value::Integer(i) => i.to_string(),
            Value::Float(x) => {
                let s = x.to_string();
                // f64 Display never uses exponent notation, but may print "-0"
                if s == "-0" {
                    "0".to_string()
                } else {
                    s
                }
            }
            Value::Boolean(b) => b.to_string(),
            Value::Date(d) => d.format("%Y-%m-%d").to_string(),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_lexical())
    }
}

/// Converts a JSON scalar (as found in fixture files and remote responses)
/// into its lexical text. Objects, arrays and null are rejected.
pub fn json_scalar_to_text(v: &serde_json::Value) -> Option<String> {
    match v {
        serde_json::Value::String(s) => Some(s.clone()),
        serde_json::Value::Number(n) => Some(n.to_string()),
        serde_json::Value::Bool(b) => Some(b.to_string()),
        _ => None,
    }
}
