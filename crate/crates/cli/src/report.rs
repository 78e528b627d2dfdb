//! Verification reports and their JSON/CSV serialization.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::ser::Serializer;
use serde::Serialize;

use crate::error::CliError;

/// A measured or reference value: a number, a flag, or `+∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Number(f64),
    Flag(bool),
    Infinite,
}

impl Value {
    pub fn bits(v: &privstate_core::BitsValue) -> Self {
        if v.finite {
            Value::Number(v.value)
        } else {
            Value::Infinite
        }
    }

    fn csv(&self) -> String {
        match self {
            Value::Number(x) => format!("{x:.12e}"),
            Value::Flag(b) => b.to_string(),
            Value::Infinite => "inf".into(),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::Number(x) if x.is_finite() => s.serialize_f64(*x),
            Value::Number(x) if x.is_nan() => s.serialize_str("nan"),
            Value::Number(x) if *x > 0.0 => s.serialize_str("inf"),
            Value::Number(_) => s.serialize_str("-inf"),
            Value::Flag(b) => s.serialize_bool(*b),
            Value::Infinite => s.serialize_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub id: String,
    pub anchor: String,
    pub status: Status,
    pub measured: Value,
    pub reference: Value,
    pub tolerance: f64,
    pub runtime_ms: u64,
}

impl Check {
    /// Passes iff `|measured − reference| ≤ tolerance`, or the flags agree.
    pub fn new(
        id: impl Into<String>,
        anchor: impl Into<String>,
        measured: Value,
        reference: Value,
        tolerance: f64,
    ) -> Self {
        let pass = match (measured, reference) {
            (Value::Number(m), Value::Number(r)) => (m - r).abs() <= tolerance,
            (Value::Flag(m), Value::Flag(r)) => m == r,
            (Value::Infinite, Value::Infinite) => true,
            _ => false,
        };
        Self {
            id: id.into(),
            anchor: anchor.into(),
            status: if pass { Status::Pass } else { Status::Fail },
            measured,
            reference,
            tolerance,
            runtime_ms: 0,
        }
    }

    pub fn close(
        id: impl Into<String>,
        anchor: impl Into<String>,
        measured: f64,
        reference: f64,
        tolerance: f64,
    ) -> Self {
        Self::new(id, anchor, Value::Number(measured), Value::Number(reference), tolerance)
    }

    pub fn flag(id: impl Into<String>, anchor: impl Into<String>, holds: bool) -> Self {
        Self::new(id, anchor, Value::Flag(holds), Value::Flag(true), 0.0)
    }

    /// A check that could not be evaluated.
    pub fn error(id: impl Into<String>, anchor: impl Into<String>, err: impl std::fmt::Display) -> Self {
        let mut c = Self::flag(id, format!("{}: {err}", anchor.into()), false);
        c.status = Status::Fail;
        c
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn timed(mut self, start: Instant) -> Self {
        self.runtime_ms = start.elapsed().as_millis() as u64;
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub version: String,
    pub seed: u64,
    pub config_digest: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub metadata: Metadata,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    /// Sorts the checks by id.
    pub fn new(metadata: Metadata, mut checks: Vec<Check>) -> Self {
        checks.sort_by(|a, b| a.id.cmp(&b.id));
        Self { metadata, checks }
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(vec![]);
        w.write_record(["id", "anchor", "status", "measured", "reference", "tolerance", "runtime_ms"])?;
        for c in &self.checks {
            let status = if c.passed() { "pass" } else { "fail" };
            w.write_record([
                c.id.as_str(),
                c.anchor.as_str(),
                status,
                &c.measured.csv(),
                &c.reference.csv(),
                &format!("{:e}", c.tolerance),
                &c.runtime_ms.to_string(),
            ])?;
        }
        csv_string(w)
    }
}

pub(crate) fn csv_string(w: csv::Writer<Vec<u8>>) -> Result<String, CliError> {
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Writes `text` to `path`, or to stdout when no path is given.
pub fn write_output(text: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))
        }
    }
}
