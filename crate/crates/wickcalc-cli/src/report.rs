//! Report assembly and file output.

use crate::checks::{Outcome, Table};
use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::Value;
use std::io::{self, Write};
use std::path::Path;

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub id: String,
    pub inputs: Value,
    pub value: f64,
    pub target: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Error code when the check could not be evaluated.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip)]
    pub runtime_ms: f64,
    #[serde(skip)]
    pub table: Option<Table>,
}

impl CheckResult {
    pub fn new(id: &str, inputs: &Value, outcome: wickcalc::Result<Outcome>, runtime_ms: f64) -> Self {
        match outcome {
            Ok(o) => Self {
                id: id.to_string(),
                inputs: inputs.clone(),
                value: o.value,
                target: o.target,
                tolerance: o.tolerance,
                pass: o.pass && o.value.is_finite(),
                error: None,
                runtime_ms,
                table: o.table,
            },
            Err(e) => Self {
                id: id.to_string(),
                inputs: inputs.clone(),
                value: f64::NAN,
                target: f64::NAN,
                tolerance: f64::NAN,
                pass: false,
                error: Some(format!("{}: {e}", e.code())),
                runtime_ms,
                table: None,
            },
        }
    }
}

#[derive(Serialize)]
struct Report<'a> {
    model: &'a str,
    passed: usize,
    failed: usize,
    checks: &'a [CheckResult],
}

/// Compact JSON with every float printed to 17 significant digits.
struct SigFormatter;

impl Formatter for SigFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigFormatter);
    value.serialize(&mut ser).expect("report serializes");
    buf.push(b'\n');
    buf
}

pub fn report_json(model: &str, results: &[CheckResult]) -> Vec<u8> {
    let passed = results.iter().filter(|r| r.pass).count();
    to_json(&Report { model, passed, failed: results.len() - passed, checks: results })
}

pub fn timing_json(results: &[CheckResult]) -> Vec<u8> {
    let map: serde_json::Map<String, Value> = results.iter().map(|r| (r.id.clone(), Value::from(r.runtime_ms))).collect();
    to_json(&map)
}

fn sig10(v: f64) -> String {
    format!("{v:.9e}")
}

/// The check's table when it has one, otherwise a one-row summary.
pub fn check_csv(r: &CheckResult) -> io::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    match &r.table {
        Some(t) => {
            w.write_record(&t.header)?;
            for row in &t.rows {
                w.write_record(row.iter().map(|v| sig10(*v)))?;
            }
        }
        None => {
            w.write_record(["id", "value", "target", "tolerance", "pass"])?;
            w.write_record([r.id.clone(), sig10(r.value), sig10(r.target), sig10(r.tolerance), r.pass.to_string()])?;
        }
    }
    w.into_inner().map_err(|e| e.into_error())
}

pub fn summary_csv(results: &[CheckResult]) -> io::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["id", "value", "target", "tolerance", "pass"])?;
    for r in results {
        w.write_record([r.id.clone(), sig10(r.value), sig10(r.target), sig10(r.tolerance), r.pass.to_string()])?;
    }
    w.into_inner().map_err(|e| e.into_error())
}

/// Writes `bytes` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)
}
