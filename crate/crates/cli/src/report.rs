use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::CliError;

/// Fixed nine-significant-digit rendering used in every table.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.8e}")
    }
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// A data file written next to the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub name: String,
    pub kind: String,
    /// Simulation time of a profile, if any.
    pub time: Option<f64>,
    #[serde(skip)]
    pub contents: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub config: serde_json::Value,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub notes: Vec<String>,
    /// Rows that failed or ran out of budget.
    pub failures: usize,
    pub artifacts: Vec<Artifact>,
}

impl Report {
    pub fn new(command: &str, config: serde_json::Value, columns: &[&str]) -> Self {
        Self {
            command: command.into(),
            config,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            notes: Vec::new(),
            failures: 0,
            artifacts: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub fn artifact(&mut self, name: String, kind: &str, time: Option<f64>, contents: String) {
        self.artifacts.push(Artifact { name, kind: kind.into(), time, contents });
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Writes `<command>.csv`, `<command>.json` and every artifact into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        std::fs::create_dir_all(dir)?;
        let stem = self.command.replace('-', "_");
        std::fs::write(dir.join(format!("{stem}.csv")), self.csv())?;
        std::fs::write(dir.join(format!("{stem}.json")), self.json())?;
        for a in &self.artifacts {
            std::fs::write(dir.join(&a.name), &a.contents)?;
        }
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("missing run reference {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// Two whitespace-separated columns, one node per line.
pub fn two_columns(xs: &[f64], ys: &[f64]) -> String {
    let mut out = String::with_capacity(32 * xs.len());
    for (x, y) in xs.iter().zip(ys) {
        let _ = writeln!(out, "{} {}", num(*x), num(*y));
    }
    out
}

/// Parses a file written by [`two_columns`] or a CSV with a header line.
pub fn parse_columns(text: &str) -> Result<Vec<Vec<f64>>, CliError> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Result<Vec<f64>, _> =
            line.split(|c: char| c == ',' || c.is_whitespace()).filter(|f| !f.is_empty()).map(str::parse).collect();
        match fields {
            Ok(f) => rows.push(f),
            Err(_) if i == 0 => continue,
            Err(e) => return Err(CliError::Config(format!("line {}: {e}", i + 1))),
        }
    }
    Ok(rows)
}
