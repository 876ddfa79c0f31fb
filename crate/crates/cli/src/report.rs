//! Reports: one JSON and one CSV file per run, named by suite and seed.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use laxforge::rmatrix::Check;
use serde_json::{json, Map, Value};

use crate::RunConfig;

#[derive(Clone, Debug)]
pub struct Row {
    pub name: String,
    pub passed: bool,
    pub residual: String,
}

impl From<Check> for Row {
    fn from(c: Check) -> Row {
        Row { name: c.name, passed: c.passed, residual: c.residual.to_string() }
    }
}

pub struct Report {
    pub suite: String,
    pub model: String,
    pub seed: u64,
    pub parameters: Map<String, Value>,
    pub checks: Vec<Row>,
    /// Suite-specific payload (operators, roots, relations).
    pub data: Map<String, Value>,
    /// CSV header and rows; defaults to the check table.
    pub table: Option<(Vec<String>, Vec<Vec<String>>)>,
}

impl Report {
    pub fn new(suite: &str, cfg: &RunConfig) -> Report {
        Report {
            suite: suite.to_string(),
            model: cfg.model_selector.clone(),
            seed: cfg.seed,
            parameters: Map::new(),
            checks: Vec::new(),
            data: Map::new(),
            table: None,
        }
    }

    pub fn param(&mut self, key: &str, v: impl Into<Value>) {
        self.parameters.insert(key.to_string(), v.into());
    }

    pub fn push(&mut self, c: impl Into<Row>) {
        self.checks.push(c.into());
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn stem(&self) -> String {
        format!("{}-seed{}", self.suite, self.seed)
    }

    pub fn to_json(&self) -> Value {
        let checks: Vec<Value> =
            self.checks.iter().map(|c| json!({"name": c.name, "passed": c.passed, "residual": c.residual})).collect();
        json!({
            "suite": self.suite,
            "model": self.model,
            "seed": self.seed,
            "parameters": Value::Object(self.parameters.clone()),
            "checks": checks,
            "passed": self.passed(),
            "data": Value::Object(self.data.clone()),
        })
    }

    fn csv_bytes(&self) -> io::Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        match &self.table {
            Some((header, rows)) => {
                w.write_record(header)?;
                for r in rows {
                    w.write_record(r)?;
                }
            }
            None => {
                w.write_record(["suite", "seed", "check", "passed", "residual"])?;
                for c in &self.checks {
                    w.write_record([&self.suite, &self.seed.to_string(), &c.name, &c.passed.to_string(), &c.residual])?;
                }
            }
        }
        w.into_inner().map_err(|e| io::Error::other(e.to_string()))
    }

    /// Writes `<stem>.json` and `<stem>.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> io::Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let json_path = dir.join(format!("{}.json", self.stem()));
        let mut text = serde_json::to_string_pretty(&self.to_json()).map_err(io::Error::other)?;
        text.push('\n');
        fs::write(&json_path, text)?;
        let csv_path = dir.join(format!("{}.csv", self.stem()));
        fs::write(&csv_path, self.csv_bytes()?)?;
        Ok(vec![json_path, csv_path])
    }
}
