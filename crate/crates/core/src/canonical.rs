//! Canonical JSON form and content fingerprints.
//!
//! The canonical form is what fingerprints are computed over: object keys in
//! lexicographic byte order, no insignificant whitespace, integers rendered
//! exactly, floats via the shortest decimal that round-trips (at most 17
//! significant digits), and -0 normalized to 0. Two values with the same
//! canonical bytes are the same document as far as the engine is concerned.

use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Render a JSON value in canonical form.
pub fn to_canonical_string(value: &Value) -> Result<String> {
    let mut out = String::new();
    write_value(value, &mut out)?;
    Ok(out)
}

/// Canonical bytes of any serializable value.
pub fn canonical_bytes<T: serde::Serialize>(value: &T) -> Result<Vec<u8>> {
    let v = serde_json::to_value(value)?;
    Ok(to_canonical_string(&v)?.into_bytes())
}

/// SHA-256 of the canonical bytes, lowercase hex.
pub fn fingerprint<T: serde::Serialize>(value: &T) -> Result<String> {
    Ok(hex::encode(Sha256::digest(canonical_bytes(value)?)))
}

fn write_value(value: &Value, out: &mut String) -> Result<()> {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(true) => out.push_str("true"),
        Value::Bool(false) => out.push_str("false"),
        Value::Number(n) => write_number(n, out)?,
        Value::String(s) => write_string(s, out),
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(item, out)?;
            }
            out.push(']');
        }
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort_unstable();
            out.push('{');
            for (i, key) in keys.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_string(key, out);
                out.push(':');
                write_value(&map[key.as_str()], out)?;
            }
            out.push('}');
        }
    }
    Ok(())
}

fn write_number(n: &serde_json::Number, out: &mut String) -> Result<()> {
    // Integers keep their exact digits so 64-bit values beyond 2^53 survive.
    if let Some(u) = n.as_u64() {
        out.push_str(&u.to_string());
        return Ok(());
    }
    if let Some(i) = n.as_i64() {
        out.push_str(&i.to_string());
        return Ok(());
    }
    let f = n
        .as_f64()
        .ok_or_else(|| Error::Domain(format!("non-finite number {n} has no canonical form")))?;
    if !f.is_finite() {
        return Err(Error::Domain("non-finite number has no canonical form".into()));
    }
    if f == 0.0 {
        out.push('0');
    } else {
        // Display emits the shortest decimal that parses back to the same f64.
        out.push_str(&f.to_string());
    }
    Ok(())
}

fn write_string(s: &str, out: &mut String) {
    // serde_json's escaping is minimal and deterministic.
    out.push_str(&serde_json::to_string(s).expect("string serialization is infallible"));
}
