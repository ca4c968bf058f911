//! Versioned, append-only report files.
//!
//! A run writes `<experiment>-vNNNN.json` plus one CSV per table, each created
//! exclusively so earlier reports are never overwritten. Everything except the
//! `metadata` object is a deterministic function of the config, its inputs
//! and the cache-independent numerics.

use std::fs::{self, OpenOptions};
use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};
use zdet::spec::SCHEMA;
use zdet::Complex64;

use crate::error::CliError;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub limit: f64,
}

impl Check {
    /// Passes when `value <= limit`; NaN fails.
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self { name: name.into(), passed: value <= limit, value, limit }
    }

    pub fn holds(name: impl Into<String>, passed: bool) -> Self {
        Self { name: name.into(), passed, value: f64::from(u8::from(passed)), limit: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&'static str]) -> Self {
        Self { name: name.to_string(), header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

/// Formats a float so that parsing it back gives the same bits.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Outcome {
    pub payload: Value,
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
    /// Conditions that make a result suspect without failing it.
    pub flags: Vec<String>,
}

impl Outcome {
    pub fn status(&self) -> Status {
        if self.checks.is_empty() {
            Status::Unchecked
        } else if self.checks.iter().all(|c| c.passed) {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Unchecked,
    Error,
}

pub struct Header<'a> {
    pub experiment: &'a str,
    pub config_hash: &'a str,
    pub metadata: Value,
}

pub fn document(h: &Header<'_>, status: Status, body: Value) -> Value {
    let mut doc = json!({
        "schema": SCHEMA,
        "artifact_version": ARTIFACT_VERSION,
        "experiment": h.experiment,
        "config_hash": h.config_hash,
        "status": status,
        "metadata": h.metadata,
    });
    let map = doc.as_object_mut().expect("object");
    if let Value::Object(extra) = body {
        map.extend(extra);
    }
    doc
}

pub fn timestamp() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Claims the next free version of `<stem>-vNNNN.json` in `dir`.
fn claim(dir: &Path, stem: &str) -> Result<(u32, fs::File, PathBuf), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    for v in 1..=9999u32 {
        let path = dir.join(format!("{stem}-v{v:04}.json"));
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(f) => return Ok((v, f, path)),
            Err(e) if e.kind() == ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(CliError::io(&path, e)),
        }
    }
    Err(CliError::io(dir, std::io::Error::other("report versions exhausted")))
}

/// Writes the report document and its tables; returns the report path.
pub fn write(dir: &Path, stem: &str, doc: &mut Value, tables: &[Table]) -> Result<PathBuf, CliError> {
    let (version, mut file, path) = claim(dir, stem)?;
    let mut names = Vec::with_capacity(tables.len());
    for t in tables {
        let name = format!("{stem}-v{version:04}.{}.csv", t.name);
        let p = dir.join(&name);
        let mut f = OpenOptions::new().write(true).create_new(true).open(&p).map_err(|e| CliError::io(&p, e))?;
        f.write_all(t.to_csv().as_bytes()).map_err(|e| CliError::io(&p, e))?;
        names.push(name);
    }
    let meta = doc["metadata"].as_object_mut().expect("metadata object");
    meta.insert("version".into(), json!(version));
    meta.insert("tables".into(), json!(names));
    let text = serde_json::to_string_pretty(doc).expect("report serializes");
    file.write_all(text.as_bytes()).and_then(|_| file.write_all(b"\n")).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}
