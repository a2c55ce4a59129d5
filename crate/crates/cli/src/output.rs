use std::io::Write;

use serde_json::{Map, Value};

use crate::CliError;

fn io(e: impl std::fmt::Display) -> CliError {
    CliError::Invalid(format!("write failed: {e}"))
}

/// A closed pipe downstream (`| head`) is not an error.
pub fn written(r: std::io::Result<()>) -> Result<(), CliError> {
    match r {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(io(e)),
        _ => Ok(()),
    }
}

/// Pretty JSON, or a one-row CSV whose columns are the top-level keys
/// (nested values are embedded as JSON text).
pub fn emit(out: &mut dyn Write, value: &Value, csv: bool) -> Result<(), CliError> {
    if !csv {
        let text = serde_json::to_string_pretty(value).map_err(io)?;
        return written(writeln!(out, "{text}"));
    }
    let empty = Map::new();
    let obj = value.as_object().unwrap_or(&empty);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(obj.keys()).map_err(io)?;
    w.write_record(obj.values().map(cell)).map_err(io)?;
    written(out.write_all(&w.into_inner().map_err(io)?))
}

pub fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => n.to_string(),
        other => other.to_string(),
    }
}

pub fn write_file(path: &str, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Invalid(format!("{path}: {e}")))
}
