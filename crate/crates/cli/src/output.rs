use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use serde_json::Value;

use crate::Failure;

/// Twelve significant digits in scientific notation.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        x.to_string()
    }
}

pub type Csv = csv::Writer<Box<dyn Write>>;

/// CSV writer on `path`, or on stdout when `None`.
pub fn csv_to(path: Option<&Path>) -> Result<Csv, Failure> {
    let sink: Box<dyn Write> = match path {
        Some(p) => Box::new(File::create(p).map_err(|e| Failure::io(p, e))?),
        None => Box::new(io::stdout()),
    };
    Ok(csv::Writer::from_writer(sink))
}

pub fn row(w: &mut Csv, values: &[f64]) -> Result<(), Failure> {
    w.write_record(values.iter().map(|&x| num(x))).map_err(csv_err)
}

pub fn header(w: &mut Csv, names: &[&str]) -> Result<(), Failure> {
    w.write_record(names).map_err(csv_err)
}

pub fn finish(mut w: Csv) -> Result<(), Failure> {
    w.flush().map_err(|e| Failure::Validation(e.to_string()))
}

fn csv_err(e: csv::Error) -> Failure {
    Failure::Validation(e.to_string())
}

/// Replace every float by its shortest round-trip decimal string.
pub fn faithful(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => Value::String(format!("{:?}", n.as_f64().unwrap_or(f64::NAN))),
        Value::Array(items) => Value::Array(items.into_iter().map(faithful).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, faithful(v))).collect()),
        other => other,
    }
}

pub fn write_json(path: &Path, value: &Value) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::Validation(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Failure::io(path, e))
}
