//! Columnar result tables, CSV rendering and the replay header.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Column {
    pub name: String,
    pub unit: String,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<Column>,
}

impl Table {
    /// `columns` are `(name, unit)` pairs; rows are pushed afterwards.
    pub fn new(name: &str, columns: &[(&str, &str)]) -> Self {
        Self {
            name: name.into(),
            columns: columns
                .iter()
                .map(|(n, u)| Column { name: (*n).into(), unit: (*u).into(), values: Vec::new() })
                .collect(),
        }
    }

    pub fn push(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        for (c, v) in self.columns.iter_mut().zip(row) {
            c.values.push(*v);
        }
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, |c| c.values.len())
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().find(|c| c.name == name).map(|c| c.values.as_slice())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioResult {
    pub command: String,
    /// Library module the command delegates to
    pub module: String,
    pub version: String,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
    pub wall_seconds: f64,
    pub notes: Vec<String>,
    pub tables: Vec<Table>,
}

impl ScenarioResult {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn csv_name(&self, table: &Table) -> String {
        format!("{}_{}.csv", self.command, table.name)
    }

    /// CSV with a commented header; free of timing data, so identical inputs
    /// give identical bytes.
    pub fn render_csv(&self, table: &Table) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# nlo-quanta {}", self.version);
        let _ = writeln!(s, "# command: {}", self.command);
        let _ = writeln!(s, "# config_sha256: {}", self.config_hash);
        let units: Vec<String> = table.columns.iter().map(|c| format!("{}={}", c.name, c.unit)).collect();
        let _ = writeln!(s, "# units: {}", units.join(" "));
        let names: Vec<&str> = table.columns.iter().map(|c| c.name.as_str()).collect();
        let _ = writeln!(s, "{}", names.join(","));
        for i in 0..table.rows() {
            let row: Vec<String> = table.columns.iter().map(|c| format_value(c.values[i])).collect();
            let _ = writeln!(s, "{}", row.join(","));
        }
        s
    }

    /// Writes one CSV per table plus `<command>.json`; returns the paths.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        let mut paths = Vec::new();
        for t in &self.tables {
            let p = dir.join(self.csv_name(t));
            fs::write(&p, self.render_csv(t)).map_err(|e| io_err(&p, e))?;
            paths.push(p);
        }
        let p = dir.join(format!("{}.json", self.command));
        let json = serde_json::to_string_pretty(self).map_err(|e| Error::Numeric(e.to_string()))?;
        fs::write(&p, json).map_err(|e| io_err(&p, e))?;
        paths.push(p);
        Ok(paths)
    }
}

pub(crate) fn io_err(p: &Path, e: std::io::Error) -> Error {
    Error::Contract(format!("{}: {e}", p.display()))
}

/// Shortest round-trip representation; `nan` for missing values.
pub fn format_value(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:e}")
    }
}

/// The `(command, config hash)` pair from a CSV header written by
/// [`ScenarioResult::render_csv`].
pub fn read_csv_header(text: &str) -> Option<(String, String)> {
    let mut command = None;
    let mut hash = None;
    for line in text.lines().take_while(|l| l.starts_with('#')) {
        if let Some(c) = line.strip_prefix("# command: ") {
            command = Some(c.trim().to_string());
        } else if let Some(h) = line.strip_prefix("# config_sha256: ") {
            hash = Some(h.trim().to_string());
        }
    }
    Some((command?, hash?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ScenarioResult {
        let mut t = Table::new("sweep", &[("x", "1"), ("y", "s")]);
        t.push(&[1.0, 0.1]);
        t.push(&[2.0, f64::NAN]);
        ScenarioResult {
            command: "squeeze".into(),
            module: "closed_form".into(),
            version: VERSION.into(),
            config_hash: "ab".repeat(32),
            seed: None,
            config: serde_json::Value::Null,
            wall_seconds: 0.5,
            notes: vec![],
            tables: vec![t],
        }
    }

    #[test]
    fn csv_layout_and_header_roundtrip() {
        let r = sample();
        let csv = r.render_csv(&r.tables[0]);
        assert!(csv.contains("# units: x=1 y=s\nx,y\n1e0,1e-1\n2e0,nan\n"));
        assert_eq!(read_csv_header(&csv), Some(("squeeze".into(), "ab".repeat(32))));
        assert_eq!(read_csv_header("x,y\n1,2\n"), None);
    }

    #[test]
    fn values_roundtrip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02e23] {
            assert_eq!(format_value(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn write_creates_files() {
        let dir = tempfile::tempdir().unwrap();
        let paths = sample().write(dir.path()).unwrap();
        assert_eq!(paths.len(), 2);
        assert!(paths[0].ends_with("squeeze_sweep.csv"));
        let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&paths[1]).unwrap()).unwrap();
        assert_eq!(json["command"], "squeeze");
    }
}
