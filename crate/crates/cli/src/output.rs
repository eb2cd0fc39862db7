//! CSV and JSON documents that carry their own configuration.

use std::io::Write;

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::error::CliResult;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Real(f64),
    Text(String),
    Missing,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Real(x) => real(*x),
            Cell::Text(s) => s.clone(),
            Cell::Missing => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(i) => json!(i),
            // non-finite reals have no JSON form
            Cell::Real(x) => serde_json::Number::from_f64(*x).map_or(Value::Null, Value::Number),
            Cell::Text(s) => json!(s),
            Cell::Missing => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}

impl From<u64> for Cell {
    fn from(i: u64) -> Self {
        Cell::Int(i)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as u64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Missing, Into::into)
    }
}

/// A real at 17 significant digits.
pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Header block shared by both formats: command, resolved configuration
/// and derived summary values.
pub struct Preamble {
    pub command: String,
    pub config: Value,
    pub summary: Map<String, Value>,
}

impl Preamble {
    pub fn new(command: &str, config: impl Serialize) -> Self {
        Self {
            command: command.to_string(),
            config: serde_json::to_value(config).expect("configuration serializes"),
            summary: Map::new(),
        }
    }

    pub fn note(&mut self, key: &str, value: impl Serialize) {
        self.summary.insert(
            key.to_string(),
            serde_json::to_value(value).expect("summary serializes"),
        );
    }
}

/// Writes rows as they arrive (CSV) or buffers them for one JSON object.
pub struct TableWriter<W: Write> {
    out: W,
    format: OutFormat,
    columns: Vec<String>,
    preamble: Preamble,
    rows: Vec<Value>,
}

impl<W: Write> TableWriter<W> {
    pub fn start(mut out: W, format: OutFormat, preamble: Preamble, columns: &[&str]) -> CliResult<Self> {
        if format == OutFormat::Csv {
            writeln!(out, "# schema_version: {SCHEMA_VERSION}")?;
            writeln!(out, "# command: {}", preamble.command)?;
            writeln!(out, "# config: {}", preamble.config)?;
            for (k, v) in &preamble.summary {
                writeln!(out, "# {k}: {v}")?;
            }
            writeln!(out, "{}", columns.join(","))?;
        }
        Ok(Self {
            out,
            format,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            preamble,
            rows: Vec::new(),
        })
    }

    pub fn row(&mut self, cells: Vec<Cell>) -> CliResult<()> {
        debug_assert_eq!(cells.len(), self.columns.len());
        match self.format {
            OutFormat::Csv => {
                let line: Vec<String> = cells.iter().map(Cell::csv).collect();
                writeln!(self.out, "{}", line.join(","))?;
                self.out.flush()?;
            }
            OutFormat::Json => {
                let obj: Map<String, Value> = self.columns.iter().cloned().zip(cells.iter().map(Cell::json)).collect();
                self.rows.push(Value::Object(obj));
            }
        }
        Ok(())
    }

    pub fn finish(mut self) -> CliResult<()> {
        if self.format == OutFormat::Json {
            let doc = json!({
                "schema_version": SCHEMA_VERSION,
                "command": self.preamble.command,
                "config": self.preamble.config,
                "summary": Value::Object(std::mem::take(&mut self.preamble.summary)),
                "columns": self.columns,
                "rows": self.rows,
            });
            serde_json::to_writer_pretty(&mut self.out, &doc).map_err(std::io::Error::from)?;
            writeln!(self.out)?;
        }
        self.out.flush()?;
        Ok(())
    }
}
