//! Canonical JSON encoding.
//!
//! Every JSON file in a URDD is written through [`to_canonical_json`]: object
//! keys sorted, two-space indentation, LF line endings, and floats printed
//! with exactly 17 significant digits (trailing zeros trimmed). Integers stay
//! integers. The output of `to_canonical_json(parse(to_canonical_json(v)))` is
//! byte-identical to `to_canonical_json(v)`, which is what makes module
//! digests reproducible.

use serde::Serialize;
use serde_json::{Number, Value};
use sha2::{Digest, Sha256};

use crate::error::{Result, StoreError};

/// Serialize any payload into canonical JSON bytes (with trailing newline).
pub fn to_canonical_json<T: Serialize + ?Sized>(payload: &T) -> Result<String> {
    let value =
        serde_json::to_value(payload).map_err(|e| StoreError::Unrepresentable(e.to_string()))?;
    value_to_canonical_json(&value)
}

pub fn value_to_canonical_json(value: &Value) -> Result<String> {
    let mut out = String::new();
    write_value(value, 0, &mut out)?;
    out.push('\n');
    Ok(out)
}

/// Hex SHA-256 of a byte slice.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn write_value(value: &Value, depth: usize, out: &mut String) -> Result<()> {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => out.push_str(&format_number(n)?),
        Value::String(s) => out.push_str(&escape(s)),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return Ok(());
            }
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                indent(depth + 1, out);
                write_value(item, depth + 1, out)?;
                if i + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            indent(depth, out);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return Ok(());
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, key) in keys.iter().enumerate() {
                indent(depth + 1, out);
                out.push_str(&escape(key));
                out.push_str(": ");
                write_value(&map[key.as_str()], depth + 1, out)?;
                if i + 1 < keys.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            indent(depth, out);
            out.push('}');
        }
    }
    Ok(())
}

fn indent(depth: usize, out: &mut String) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn escape(s: &str) -> String {
    // serde_json's string escaping is already canonical (minimal escapes).
    serde_json::to_string(s).expect("string serialization is infallible")
}

fn format_number(n: &Number) -> Result<String> {
    if let Some(u) = n.as_u64() {
        return Ok(u.to_string());
    }
    if let Some(i) = n.as_i64() {
        return Ok(i.to_string());
    }
    let x = n
        .as_f64()
        .ok_or_else(|| StoreError::Unrepresentable(n.to_string()))?;
    format_f64(x)
}

/// Format a finite float with 17 significant digits, trimming trailing zeros.
///
/// Values with decimal exponent in `[-5, 17)` are written positionally
/// (`0.10000000000000001`, `1.5`, `-2.0`), others in scientific notation
/// (`1.2345e-7`). `-0.0` is written as `0.0`.
pub fn format_f64(x: f64) -> Result<String> {
    if !x.is_finite() {
        return Err(StoreError::Unrepresentable(format!("{x}")));
    }
    if x == 0.0 {
        return Ok("0.0".to_string());
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exponent) = sci
        .split_once('e')
        .expect("scientific formatting always contains an exponent");
    let exponent: i32 = exponent.parse().expect("exponent is an integer");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let digits = digits.trim_end_matches('0');
    let digits = if digits.is_empty() { "0" } else { digits };

    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if (-5..17).contains(&exponent) {
        if exponent >= 0 {
            let int_len = exponent as usize + 1;
            if digits.len() <= int_len {
                out.push_str(digits);
                out.extend(std::iter::repeat_n('0', int_len - digits.len()));
                out.push_str(".0");
            } else {
                out.push_str(&digits[..int_len]);
                out.push('.');
                out.push_str(&digits[int_len..]);
            }
        } else {
            out.push_str("0.");
            out.extend(std::iter::repeat_n('0', (-exponent - 1) as usize));
            out.push_str(digits);
        }
    } else {
        out.push_str(&digits[..1]);
        out.push('.');
        out.push_str(if digits.len() > 1 { &digits[1..] } else { "0" });
        out.push('e');
        out.push_str(&exponent.to_string());
    }
    Ok(out)
}
