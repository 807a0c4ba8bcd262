//! Versioned machine-readable reports.
//!
//! JSON layout:
//!
//! ```text
//! {
//!   "schema_version": 1,
//!   "tool_version": "0.1.0",
//!   "command": "construct",
//!   "input": { ... },          flags and field provenance
//!   "records": [ { ... } ],    flat per-sample rows
//!   "summary": { ... },
//!   "timestamp": "unix:..."    the only field that varies between runs
//! }
//! ```
//!
//! Record values are numbers, strings, booleans or null. The CSV encoding
//! writes the records only, one header row followed by one row per record;
//! null is the empty cell.

use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

pub type Record = Map<String, Value>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool_version: String,
    pub command: String,
    pub input: Map<String, Value>,
    pub records: Vec<Record>,
    pub summary: Map<String, Value>,
    pub timestamp: String,
}

/// Finite floats become numbers, anything else null.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

pub fn opt_num(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

impl Report {
    pub fn new(command: &str, input: Map<String, Value>) -> Self {
        let secs = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Report {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            input,
            records: Vec::new(),
            summary: Map::new(),
            timestamp: format!("unix:{secs}"),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn from_json(src: &str) -> Result<Report> {
        serde_json::from_str(src).map_err(|e| Error::InvalidInput(format!("report: {e}")))
    }

    /// Column names: keys of the first record, then any new keys in order of appearance.
    pub fn columns(&self) -> Vec<String> {
        let mut cols: Vec<String> = Vec::new();
        for r in &self.records {
            for k in r.keys() {
                if !cols.contains(k) {
                    cols.push(k.clone());
                }
            }
        }
        cols
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let cols = self.columns();
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::InvalidInput(format!("csv: {e}"));
        w.write_record(&cols).map_err(io)?;
        for r in &self.records {
            let row: Vec<String> = cols
                .iter()
                .map(|c| match r.get(c) {
                    None | Some(Value::Null) => String::new(),
                    Some(Value::String(s)) => s.clone(),
                    Some(v) => v.to_string(),
                })
                .collect();
            w.write_record(&row).map_err(io)?;
        }
        w.flush()
            .map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}

/// Parses CSV written by [`Report::write_csv`] back into records.
///
/// Cells are read as JSON scalars where they parse as one and as strings
/// otherwise; empty cells are null.
pub fn records_from_csv(src: &str) -> Result<Vec<Record>> {
    let mut rdr = csv::Reader::from_reader(src.as_bytes());
    let io = |e: csv::Error| Error::InvalidInput(format!("csv: {e}"));
    let headers = rdr.headers().map_err(io)?.clone();
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(io)?;
        let mut rec = Map::new();
        for (k, cell) in headers.iter().zip(row.iter()) {
            let value = if cell.is_empty() {
                Value::Null
            } else {
                match serde_json::from_str::<Value>(cell) {
                    Ok(v @ (Value::Number(_) | Value::Bool(_))) => v,
                    _ => Value::String(cell.to_string()),
                }
            };
            rec.insert(k.to_string(), value);
        }
        out.push(rec);
    }
    Ok(out)
}
