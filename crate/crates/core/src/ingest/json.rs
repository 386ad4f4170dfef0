use num_rational::BigRational;
use serde_json::{Map, Value};

use crate::model::decimal::parse_decimal;
use crate::{Error, Result};

pub(crate) fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::MalformedDump(format!("invalid JSON: {e}")))
}

/// Source text of a JSON number (exact, thanks to arbitrary precision), or
/// the contents of a string holding a decimal.
pub(crate) fn number_text(value: &Value) -> Option<String> {
    match value {
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) if parse_decimal(s).is_some() => Some(s.trim().to_string()),
        _ => None,
    }
}

pub(crate) fn rational(value: &Value) -> Option<BigRational> {
    number_text(value).and_then(|t| parse_decimal(&t))
}

pub(crate) fn rational_field(obj: &Map<String, Value>, key: &str, context: &str) -> Result<BigRational> {
    obj.get(key)
        .and_then(rational)
        .ok_or_else(|| Error::MalformedDump(format!("{context}: `{key}` must be a decimal number")))
}
