//! Shared helpers for the line-oriented text formats.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub(crate) fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Parses a list of decimal floats separated by `sep`, rejecting NaN and
/// infinities. Returns a message (no location) on failure; callers attach
/// path and line.
pub(crate) fn parse_floats(s: &str, sep: char) -> std::result::Result<Vec<f64>, String> {
    s.split(sep)
        .map(|tok| {
            let tok = tok.trim();
            let v: f64 = tok
                .parse()
                .map_err(|_| format!("invalid float '{tok}'"))?;
            if !v.is_finite() {
                return Err(format!("non-finite value '{tok}'"));
            }
            Ok(v)
        })
        .collect()
}

/// Parses `key=<value>` returning the value part, or a message.
pub(crate) fn parse_keyed<'a>(
    field: &'a str,
    key: &str,
) -> std::result::Result<&'a str, String> {
    field
        .strip_prefix(key)
        .and_then(|rest| rest.strip_prefix('='))
        .ok_or_else(|| format!("expected '{key}=<value>', found '{field}'"))
}

/// Formats a float slice with `sep`, using Rust's shortest round-trip
/// representation so emitted files are byte-deterministic.
pub(crate) fn join_floats(values: &[f64], sep: char) -> String {
    let mut out = String::new();
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(sep);
        }
        out.push_str(&format!("{v}"));
    }
    out
}
