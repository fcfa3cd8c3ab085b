//! Report, manifest, CSV and gnuplot data files.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{Command, ExperimentConfig};

/// A named numeric table; the description names the inequality or identity
/// the series instantiates and goes into the `.dat` header.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub description: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, description: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_owned(),
            description: description.to_owned(),
            columns: columns.iter().map(|c| (*c).to_owned()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(","));
            s.push('\n');
        }
        s
    }

    /// Whitespace-separated columns behind `#` header lines.
    pub fn dat(&self) -> String {
        let mut s = format!("# {}\n# {}\n", self.name, self.description);
        s.push_str(&format!("# {}\n", self.columns.join(" ")));
        for r in &self.rows {
            s.push_str(&r.iter().map(|v| format!("{v:.12e}")).collect::<Vec<_>>().join(" "));
            s.push('\n');
        }
        s
    }
}

/// Everything a command produced, before it touches the disk.
#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub command: Command,
    pub pass: bool,
    pub result: serde_json::Value,
    #[serde(skip)]
    pub tables: Vec<Table>,
    /// Wall-clock per stage; copied into the manifest, never into the report.
    #[serde(skip)]
    pub stages: Vec<Stage>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Stage {
    pub name: String,
    pub seconds: f64,
}

/// Echo of the run; timings live here and nowhere in the report.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: Command,
    pub config: ExperimentConfig,
    pub seed: u64,
    pub workers: usize,
    pub stages: Vec<Stage>,
    pub outputs: Vec<String>,
    pub pass: Option<bool>,
    pub error: Option<String>,
}

fn write_file(dir: &Path, name: &str, body: &str, written: &mut Vec<String>) -> io::Result<()> {
    let mut f = fs::File::create(dir.join(name))?;
    f.write_all(body.as_bytes())?;
    written.push(name.to_owned());
    Ok(())
}

/// Writes one `.dat` file per series and returns the file names.
pub fn emit_plot_data(dir: &Path, series: &[Table]) -> io::Result<Vec<String>> {
    if series.is_empty() {
        return Err(io::Error::new(io::ErrorKind::InvalidInput, "no series to write"));
    }
    let mut written = Vec::new();
    for t in series {
        write_file(dir, &format!("{}.dat", t.name), &t.dat(), &mut written)?;
    }
    Ok(written)
}

/// `report.json`, then one CSV and one `.dat` per table.
pub fn write_outcome(dir: &Path, outcome: &Outcome) -> io::Result<Vec<String>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let report = serde_json::to_string_pretty(outcome).map_err(io::Error::other)?;
    write_file(dir, "report.json", &(report + "\n"), &mut written)?;
    for t in &outcome.tables {
        write_file(dir, &format!("{}.csv", t.name), &t.csv(), &mut written)?;
    }
    if !outcome.tables.is_empty() {
        written.extend(emit_plot_data(dir, &outcome.tables)?);
    }
    Ok(written)
}

pub fn write_manifest(dir: &Path, manifest: &RunManifest) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join("manifest.json");
    let body = serde_json::to_string_pretty(manifest).map_err(io::Error::other)?;
    fs::write(&path, body + "\n")?;
    Ok(path)
}
