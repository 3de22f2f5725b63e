//! CSV tables and the run manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use ris_core::circular_noise::SeedSpec;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::SimError;

/// Version written as the first line of every CSV.
pub const SCHEMA: u32 = 1;

/// One cell. Floats print in shortest round-trip form (exponent notation for
/// very small or large magnitudes), so output is reproducible bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    F(f64),
    I(i64),
    U(usize),
    S(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::U(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::I(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::S(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::S(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::S(v.to_string())
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

impl Cell {
    fn render(&self, out: &mut String) {
        match self {
            Cell::F(v) => write!(out, "{v:?}").unwrap(),
            Cell::I(v) => write!(out, "{v}").unwrap(),
            Cell::U(v) => write!(out, "{v}").unwrap(),
            Cell::S(s) if s.contains([',', '"', '\n']) => {
                write!(out, "\"{}\"", s.replace('"', "\"\"")).unwrap()
            }
            Cell::S(s) => out.push_str(s),
            Cell::Empty => {}
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::F(v) => Some(*v),
            Cell::I(v) => Some(*v as f64),
            Cell::U(v) => Some(*v as f64),
            _ => None,
        }
    }
}

/// A named table written as `<name>.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&str]) -> Self {
        Self {
            name: name.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len(), "row width in {}", self.name);
        self.rows.push(row);
    }

    /// A matrix without a header row, for heatmaps.
    pub fn matrix(name: impl Into<String>, rows: Vec<Vec<f64>>) -> Self {
        Self {
            name: name.into(),
            header: Vec::new(),
            rows: rows
                .into_iter()
                .map(|r| r.into_iter().map(Cell::F).collect())
                .collect(),
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<Cell>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k].clone()).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# schema={SCHEMA}\n");
        if !self.header.is_empty() {
            out.push_str(&self.header.join(","));
            out.push('\n');
        }
        for row in &self.rows {
            for (i, c) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                c.render(&mut out);
            }
            out.push('\n');
        }
        out
    }
}

/// One written file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifestFile {
    pub name: String,
    pub rows: usize,
    pub sha256: String,
}

/// Summary of a run, written as `manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub schema: u32,
    pub experiment: String,
    pub config_hash: String,
    pub seed: SeedSpec,
    pub git_describe: String,
    pub wall_time_s: f64,
    pub output_dir: PathBuf,
    pub files: Vec<ManifestFile>,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// SHA-256 of the canonical JSON form of the semantic configuration.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let json = serde_json::to_vec(&cfg.semantic()).expect("configuration serializes");
    hex(&Sha256::digest(&json))
}

/// `git describe --always --dirty`, or `"unknown"` outside a repository.
pub fn git_describe() -> String {
    Command::new("git")
        .args(["describe", "--always", "--dirty"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .unwrap_or_else(|| "unknown".into())
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SimError + '_ {
    move |source| SimError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes every table into `dir` and returns their manifest entries.
pub fn write_tables(dir: &Path, tables: &[Table]) -> Result<Vec<ManifestFile>, SimError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    tables
        .iter()
        .map(|t| {
            let path = dir.join(format!("{}.csv", t.name));
            let csv = t.to_csv();
            fs::write(&path, &csv).map_err(io_err(&path))?;
            Ok(ManifestFile {
                name: format!("{}.csv", t.name),
                rows: t.rows.len(),
                sha256: hex(&Sha256::digest(csv.as_bytes())),
            })
        })
        .collect()
}

pub fn write_manifest(dir: &Path, manifest: &Manifest) -> Result<PathBuf, SimError> {
    let path = dir.join("manifest.json");
    let json = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    fs::write(&path, json + "\n").map_err(io_err(&path))?;
    Ok(path)
}
