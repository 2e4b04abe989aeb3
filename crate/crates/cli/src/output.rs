//! Reports and the files an experiment leaves behind.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use vnag_core::Verdict;

use crate::error::{CliError, Result};

pub const REPORT_FILE: &str = "report.json";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRecord {
    pub experiment: String,
    pub input: Value,
    pub outputs: Value,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub verdicts: Vec<Verdict>,
    /// Choices the run made that its inputs do not pin down.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub artifacts: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

impl Artifact {
    pub fn new(name: impl Into<String>, contents: String) -> Self {
        Artifact {
            name: name.into(),
            contents,
        }
    }
}

/// Everything an experiment produced, held in memory until written.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: ReportRecord,
    pub files: Vec<Artifact>,
}

impl Outcome {
    pub fn new(experiment: impl Into<String>, input: Value, outputs: Value) -> Self {
        Outcome {
            report: ReportRecord {
                experiment: experiment.into(),
                input,
                outputs,
                verdicts: Vec::new(),
                notes: Vec::new(),
                artifacts: Vec::new(),
                wall_clock_seconds: None,
            },
            files: Vec::new(),
        }
    }

    pub fn note(mut self, text: impl Into<String>) -> Self {
        self.report.notes.push(text.into());
        self
    }

    pub fn file(mut self, name: impl Into<String>, contents: String) -> Self {
        self.files.push(Artifact::new(name, contents));
        self
    }

    pub fn report_json(&self) -> String {
        let mut report = self.report.clone();
        report.artifacts = self
            .files
            .iter()
            .map(|f| f.name.clone())
            .chain(std::iter::once(REPORT_FILE.to_string()))
            .collect();
        let mut text = serde_json::to_string_pretty(&report).expect("report is plain data");
        text.push('\n');
        text
    }

    /// Writes every artifact and `report.json` into `dir`. If any write fails
    /// the files already written are removed.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let report = Artifact::new(REPORT_FILE, self.report_json());
        let mut written = Vec::new();
        for art in self.files.iter().chain(std::iter::once(&report)) {
            let path = dir.join(&art.name);
            if let Err(e) = fs::write(&path, &art.contents) {
                remove_all(&written);
                // A failed write may leave a truncated file.
                let _ = fs::remove_file(&path);
                return Err(CliError::io(path, e));
            }
            written.push(path);
        }
        Ok(written)
    }
}

pub fn remove_all(paths: &[PathBuf]) {
    for p in paths {
        let _ = fs::remove_file(p);
    }
}

/// CSV with a header row; numbers in `{:.16e}`, missing values empty.
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let _ = match cell {
                    Cell::Num(v) => write!(out, "{v:.16e}"),
                    Cell::Int(v) => write!(out, "{v}"),
                    Cell::Text(s) => write!(out, "{s}"),
                    Cell::Empty => Ok(()),
                };
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_formats_cells() {
        let mut t = Table::new(["a", "b", "c"]);
        t.push(vec![0.5.into(), Cell::Empty, "x".into()]);
        assert_eq!(t.to_csv(), "a,b,c\n5.0000000000000000e-1,,x\n");
    }

    #[test]
    fn report_lists_artifacts() {
        let o = Outcome::new("e", Value::Null, Value::Null).file("a.csv", String::new());
        let v: Value = serde_json::from_str(&o.report_json()).unwrap();
        assert_eq!(v["artifacts"], serde_json::json!(["a.csv", "report.json"]));
        assert!(v.get("wall_clock_seconds").is_none());
    }

    #[test]
    fn failed_write_leaves_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let o = Outcome::new("e", Value::Null, Value::Null)
            .file("ok.csv", "1\n".into())
            .file("missing/sub.csv", "2\n".into());
        assert!(o.write(dir.path()).is_err());
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
    }
}
