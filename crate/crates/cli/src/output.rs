//! CSV tables, digests and the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Manifest layout version. Bump on any field change.
pub const MANIFEST_SCHEMA: u32 = 1;

pub const MANIFEST_NAME: &str = "manifest.json";

/// 17 significant digits, so every `f64` round-trips.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

/// One cell of a CSV row.
pub enum Cell {
    F(f64),
    S(&'static str),
    U(usize),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}

impl From<&'static str> for Cell {
    fn from(s: &'static str) -> Self {
        Cell::S(s)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::U(n)
    }
}

pub struct Table {
    pub name: &'static str,
    header: &'static [&'static str],
    text: String,
    rows: usize,
}

impl Table {
    pub fn new(name: &'static str, header: &'static [&'static str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Table { name, header, text, rows: 0 }
    }

    pub fn push(&mut self, cells: Vec<Cell>) {
        assert_eq!(cells.len(), self.header.len(), "row width for {}", self.name);
        let line: Vec<String> = cells
            .into_iter()
            .map(|c| match c {
                Cell::F(x) => fmt_f64(x),
                Cell::S(s) => s.to_string(),
                Cell::U(n) => n.to_string(),
            })
            .collect();
        self.text.push_str(&line.join(","));
        self.text.push('\n');
        self.rows += 1;
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub rows: usize,
    pub columns: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub library: &'static str,
    pub version: &'static str,
    pub scenario: &'static str,
    pub status: &'static str,
    pub config: serde_json::Value,
    pub wall_time_seconds: f64,
    pub threads: usize,
    pub diagnostics: BTreeMap<String, f64>,
    pub scalars: BTreeMap<String, f64>,
    pub files: Vec<FileEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Creates `dir` and proves it writable before any computation runs.
pub fn prepare_dir(dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let probe = dir.join(".wgqed-write-probe");
    fs::write(&probe, b"")?;
    fs::remove_file(probe)
}

pub fn write_table(dir: &Path, table: &Table) -> io::Result<FileEntry> {
    let file = format!("{}.csv", table.name);
    fs::write(dir.join(&file), table.text.as_bytes())?;
    Ok(FileEntry {
        path: file,
        sha256: sha256_hex(table.text.as_bytes()),
        rows: table.rows,
        columns: table.header.iter().map(|s| s.to_string()).collect(),
    })
}

pub fn write_manifest(dir: &Path, manifest: &RunManifest) -> io::Result<PathBuf> {
    let path = dir.join(MANIFEST_NAME);
    let mut text = serde_json::to_string_pretty(manifest).map_err(io::Error::other)?;
    text.push('\n');
    fs::write(&path, text)?;
    Ok(path)
}
