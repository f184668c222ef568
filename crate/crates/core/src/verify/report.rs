use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::config::{Format, OutputSpec};
use super::record::{format_number, Record, Status};
use crate::error::{Error, Result};

pub const CSV_NAME: &str = "records.csv";
pub const JSON_NAME: &str = "records.json";

const HEADER: [&str; 11] = [
    "check_id",
    "domain",
    "beta",
    "func_id",
    "lhs",
    "rhs",
    "constants",
    "margin",
    "status",
    "err_estimate",
    "runtime_ms",
];

fn io_error(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io { path: path.display().to_string(), message: e.to_string() }
}

/// Write the configured report files, returning their paths.
pub fn write_reports(records: &[Record], output: &OutputSpec) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(&output.dir).map_err(|e| io_error(&output.dir, e))?;
    let mut written = Vec::new();
    if matches!(output.format, Format::Csv | Format::Both) {
        let path = output.dir.join(CSV_NAME);
        write_csv(records, &path)?;
        written.push(path);
    }
    if matches!(output.format, Format::Json | Format::Both) {
        let path = output.dir.join(JSON_NAME);
        let mut text = serde_json::to_string_pretty(records).map_err(|e| io_error(&path, e))?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| io_error(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

pub fn write_csv(records: &[Record], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_error(path, e))?;
    w.write_record(HEADER).map_err(|e| io_error(path, e))?;
    for r in records {
        w.write_record([
            r.check_id.to_string(),
            r.domain.clone(),
            format_number(r.beta),
            r.func_id.clone(),
            format_number(r.lhs),
            format_number(r.rhs),
            r.constants_field(),
            format_number(r.margin),
            r.status.to_string(),
            format_number(r.err_estimate),
            r.runtime_ms.to_string(),
        ])
        .map_err(|e| io_error(path, e))?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

/// The columns of a written report needed to summarise it.
#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct Row {
    pub check_id: String,
    pub func_id: String,
    pub margin: f64,
    pub status: Status,
}

#[derive(Deserialize)]
struct JsonRow {
    check_id: String,
    func_id: String,
    margin: Option<f64>,
    status: Status,
}

/// Rows of `records.csv` in `dir`, or of `records.json` when there is no CSV.
pub fn read_rows(dir: &Path) -> Result<Vec<Row>> {
    let csv_path = dir.join(CSV_NAME);
    if csv_path.exists() {
        let mut r = csv::Reader::from_path(&csv_path).map_err(|e| io_error(&csv_path, e))?;
        return r
            .deserialize()
            .collect::<std::result::Result<Vec<Row>, _>>()
            .map_err(|e| io_error(&csv_path, e));
    }
    let json_path = dir.join(JSON_NAME);
    let text = fs::read_to_string(&json_path).map_err(|e| io_error(&json_path, e))?;
    let rows: Vec<JsonRow> = serde_json::from_str(&text).map_err(|e| io_error(&json_path, e))?;
    Ok(rows
        .into_iter()
        .map(|j| Row {
            check_id: j.check_id,
            func_id: j.func_id,
            // non-finite margins are written as null
            margin: j.margin.unwrap_or(f64::NEG_INFINITY),
            status: j.status,
        })
        .collect())
}

/// Per-check totals.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CheckSummary {
    pub passed: usize,
    pub failed: usize,
    pub min_margin: f64,
    pub worst: String,
}

pub fn summarise<'a>(rows: impl IntoIterator<Item = (&'a str, &'a str, f64, Status)>) -> BTreeMap<String, CheckSummary> {
    let mut out: BTreeMap<String, CheckSummary> = BTreeMap::new();
    for (check, func, margin, status) in rows {
        let s = out
            .entry(check.to_string())
            .or_insert_with(|| CheckSummary { min_margin: f64::INFINITY, ..Default::default() });
        match status {
            Status::Pass => s.passed += 1,
            Status::Fail => s.failed += 1,
        }
        if margin < s.min_margin || (margin.is_nan() && s.worst.is_empty()) {
            s.min_margin = margin;
            s.worst = func.to_string();
        }
    }
    out
}

pub fn summarise_records(records: &[Record]) -> BTreeMap<String, CheckSummary> {
    summarise(records.iter().map(|r| (r.check_id.as_str(), r.func_id.as_str(), r.margin, r.status)))
}

pub fn summarise_rows(rows: &[Row]) -> BTreeMap<String, CheckSummary> {
    summarise(rows.iter().map(|r| (r.check_id.as_str(), r.func_id.as_str(), r.margin, r.status)))
}
