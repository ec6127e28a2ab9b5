//! `summary.json` and the tabular artifacts.

use std::fs;
use std::path::Path;

use serde::Serialize;

use super::config::ReportFormat;
use super::AppError;

/// One `(measured, bound, pass)` triple.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryEntry {
    pub name: String,
    pub measured: f64,
    pub bound: f64,
    pub bound_expr: String,
    pub pass: bool,
    /// Only gating entries decide the exit status.
    pub gating: bool,
}

impl SummaryEntry {
    pub fn new(name: impl Into<String>, measured: f64, bound: f64, bound_expr: impl Into<String>, pass: bool, gating: bool) -> Self {
        SummaryEntry { name: name.into(), measured, bound, bound_expr: bound_expr.into(), pass, gating }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub schema_version: u32,
    pub experiment: String,
    pub seed: u64,
    pub pass: bool,
    /// Set when the run stopped early; artifacts then hold what was computed.
    pub partial: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub entries: Vec<SummaryEntry>,
    pub artifacts: Vec<String>,
}

impl Summary {
    pub fn failed_gates(&self) -> impl Iterator<Item = &SummaryEntry> {
        self.entries.iter().filter(|e| e.gating && !e.pass)
    }
}

/// Writes `rows` as `<stem>.csv` or `<stem>.json`; returns the file name.
pub fn write_table<T: Serialize>(dir: &Path, stem: &str, rows: &[T], format: ReportFormat) -> Result<String, AppError> {
    let (name, bytes) = match format {
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in rows {
                w.serialize(r).map_err(|e| AppError::Io(format!("{stem}: {e}")))?;
            }
            let bytes = w.into_inner().map_err(|e| AppError::Io(format!("{stem}: {e}")))?;
            (format!("{stem}.csv"), bytes)
        }
        ReportFormat::Json => {
            let text = serde_json::to_string_pretty(rows).map_err(|e| AppError::Io(format!("{stem}: {e}")))?;
            (format!("{stem}.json"), text.into_bytes())
        }
    };
    write_file(dir, &name, &bytes)?;
    Ok(name)
}

pub fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), AppError> {
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| AppError::Io(format!("{}: {e}", path.display())))
}

pub fn write_summary(dir: &Path, summary: &Summary) -> Result<(), AppError> {
    let text = serde_json::to_string_pretty(summary).map_err(|e| AppError::Io(e.to_string()))?;
    write_file(dir, "summary.json", text.as_bytes())
}
