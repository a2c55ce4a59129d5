use pathmetric::delta::{DeltaError, MetricCertificate};
use pathmetric::groups::{build_from_words, GroupError, WordTable};
use pathmetric::linarith::LinError;
use pathmetric::oracle::OracleError;
use pathmetric::pathsystem::{PathError, PathSystem};
use pathmetric::rational::{self, Rational};
use serde_json::Value;

use crate::CliError;

pub enum SystemDoc {
    Full(PathSystem),
    Invariant(WordTable),
}

impl SystemDoc {
    /// The explicit system, expanding an invariant one.
    pub fn into_full(self) -> Result<PathSystem, CliError> {
        match self {
            SystemDoc::Full(ps) => Ok(ps),
            SystemDoc::Invariant(wt) => build_from_words(&wt).map_err(CliError::from),
        }
    }
}

pub fn read(path: &str) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Invalid(format!("{path}: {e}")))
}

fn read_json(path: &str) -> Result<Value, CliError> {
    let text = read(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("{path}: {e}")))
}

/// Loads either system format; a `{"system": ...}` wrapper (as printed by
/// `gen cayley`) is unwrapped.
pub fn load_system(path: &str) -> Result<SystemDoc, CliError> {
    let mut v = read_json(path)?;
    if v.get("format").is_none() {
        if let Some(inner) = v.get_mut("system") {
            v = inner.take();
        }
    }
    match v.get("format").and_then(Value::as_str) {
        Some("pathsys/v1") => Ok(SystemDoc::Full(PathSystem::from_json_value(v)?)),
        Some("pathsys-invariant/v1") => Ok(SystemDoc::Invariant(WordTable::from_json_value(v)?)),
        Some(other) => Err(CliError::Invalid(format!("{path}: unsupported format {other:?}"))),
        None => Err(CliError::Invalid(format!("{path}: missing \"format\""))),
    }
}

pub fn load_cert(path: &str) -> Result<MetricCertificate, CliError> {
    Ok(MetricCertificate::from_json_value(&read_json(path)?)?)
}

pub fn rational_arg(name: &str, s: &str) -> Result<Rational, CliError> {
    rational::parse_rational(s).map_err(|_| CliError::Invalid(format!("{name}: not a rational: {s:?}")))
}

pub fn list(s: &str) -> Vec<String> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty()).map(String::from).collect()
}

impl From<PathError> for CliError {
    fn from(e: PathError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<GroupError> for CliError {
    fn from(e: GroupError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<LinError> for CliError {
    fn from(e: LinError) -> Self {
        match e {
            LinError::ResourceCap { .. } => CliError::Cap(e.to_string()),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

impl From<DeltaError> for CliError {
    fn from(e: DeltaError) -> Self {
        match e {
            DeltaError::Lin(l) => l.into(),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        CliError::Invalid(e.to_string())
    }
}
