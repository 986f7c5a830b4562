//! Byte-stable number formatting, JSON and CSV writers.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde_json::{Number, Value};

/// `x` rounded to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// Shortest round-trip text of [`round12`].
pub fn short(x: f64) -> String {
    round12(x).to_string()
}

/// Scientific notation with 12 significant digits; `-0` prints as `0`.
pub fn sci(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.11e}")
}

/// Round every float in the tree. Maps are `BTreeMap`s, so keys serialize
/// sorted.
pub fn pin(v: Value) -> Value {
    match v {
        Value::Number(num) if num.is_f64() => num
            .as_f64()
            .and_then(|x| Number::from_f64(round12(x)))
            .map_or(Value::Null, Value::Number),
        Value::Array(a) => Value::Array(a.into_iter().map(pin).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, v)| (k, pin(v))).collect()),
        other => other,
    }
}

pub fn json_text(v: Value) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&pin(v))?;
    s.push('\n');
    Ok(s)
}

pub fn csv_text(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// Write to `out`, or standard output.
pub fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}
