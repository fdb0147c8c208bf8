//! CSV tables and the JSON summary.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::CliError;

pub const VERSION: &str = concat!("v", env!("CARGO_PKG_VERSION"));

/// One CSV cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Empty,
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Real)
    }
}

/// Real with 17 significant digits: positional for moderate magnitudes,
/// scientific otherwise.
pub fn format_real(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "NaN".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0.0000000000000000".into();
    }
    let sci = format!("{x:.16e}");
    let exp: i32 = sci[sci.find('e').expect("exponent") + 1..].parse().expect("exponent");
    if (-6..16).contains(&exp) {
        format!("{x:.*}", (16 - exp) as usize)
    } else {
        sci
    }
}

impl Cell {
    fn render(self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Real(v) => format_real(v),
            Cell::Empty => String::new(),
        }
    }
}

/// A table with documented columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<(&'static str, &'static str)>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[(&'static str, &'static str)]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut out = String::from("# ");
        for (i, (name, doc)) in self.columns.iter().enumerate() {
            if i > 0 {
                out.push_str("; ");
            }
            let _ = write!(out, "{name}: {doc}");
        }
        out.push('\n');
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let fail = |e: csv::Error| CliError::Runtime(format!("csv: {e}"));
        w.write_record(self.columns.iter().map(|c| c.0)).map_err(fail)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.render())).map_err(fail)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Runtime(format!("csv: {e}")))?;
        out.push_str(&String::from_utf8(bytes).expect("csv output is UTF-8"));
        Ok(out)
    }
}

/// A reported statistic; `ci` is a 95% interval when one exists.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Statistic {
    pub name: String,
    pub value: Option<f64>,
    pub ci: Option<[f64; 2]>,
    pub std_err: Option<f64>,
}

const Z95: f64 = 1.959_963_984_540_054;

impl Statistic {
    pub fn exact(name: impl Into<String>, value: f64) -> Self {
        Self {
            name: name.into(),
            value: finite(value),
            ci: None,
            std_err: None,
        }
    }

    pub fn with_ci(name: impl Into<String>, value: f64, ci: (f64, f64)) -> Self {
        Self {
            name: name.into(),
            value: finite(value),
            ci: (ci.0.is_finite() && ci.1.is_finite()).then_some([ci.0, ci.1]),
            std_err: None,
        }
    }

    /// Normal interval `value +- 1.96 se`.
    pub fn with_se(name: impl Into<String>, value: f64, se: f64) -> Self {
        let mut s = Self::with_ci(name, value, (value - Z95 * se, value + Z95 * se));
        s.std_err = finite(se);
        s
    }
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Everything an experiment reports.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentResult {
    pub tables: Vec<Table>,
    pub statistics: Vec<Statistic>,
    /// Non-numeric findings (flags, lattices, reference values).
    pub diagnostics: serde_json::Map<String, Value>,
}

impl ExperimentResult {
    pub fn diagnostic(&mut self, key: &str, value: impl Into<Value>) {
        self.diagnostics.insert(key.to_string(), value.into());
    }
}

/// Hex SHA-256 of the canonical JSON form of the effective configuration.
pub fn config_hash(config: &ExperimentConfig) -> String {
    let canonical = serde_json::to_string(config).expect("configuration serializes");
    Sha256::digest(canonical.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn summary(config: &ExperimentConfig, result: &ExperimentResult) -> Value {
    json!({
        "experiment": config.experiment.name(),
        "version": VERSION,
        "seed": config.seed,
        "config_sha256": config_hash(config),
        "config": config,
        "files": result.tables.iter().map(|t| format!("{}.csv", t.name)).collect::<Vec<_>>(),
        "statistics": result.statistics,
        "diagnostics": result.diagnostics,
    })
}

pub fn write_all(dir: &Path, config: &ExperimentConfig, result: &ExperimentResult) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    for table in &result.tables {
        let path = dir.join(format!("{}.csv", table.name));
        std::fs::write(&path, table.to_csv()?).map_err(|e| CliError::io(&path, e))?;
    }
    let path = dir.join("summary.json");
    let mut text = serde_json::to_string_pretty(&summary(config, result)).expect("summary serializes");
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))
}
