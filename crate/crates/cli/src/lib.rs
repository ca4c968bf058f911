//! Batch driver for the `zdet` experiments.
//!
//! [`run`] executes one experiment config and writes a versioned JSON report
//! plus CSV tables. Reports embed the schema tag, artifact version and a hash
//! of the config and resolved inputs; wall-clock data lives only under
//! `metadata`.

// Negated float comparisons are deliberate: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cache;
pub mod config;
pub mod error;
pub mod experiments;
pub mod pool;
pub mod report;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::cache::{sha256_hex, Cache};
use crate::config::{Context, ExperimentConfig};
pub use crate::error::CliError;
use crate::experiments::Env;
pub use crate::report::Status;
use crate::report::{Header, Outcome};

/// Command-line options of one invocation.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub config: PathBuf,
    /// Overrides the config's `out`; defaults to `reports`.
    pub out: Option<PathBuf>,
    pub cache: Option<PathBuf>,
    pub threads: usize,
    pub seed: Option<u64>,
}

impl RunOptions {
    pub fn new(config: impl Into<PathBuf>) -> Self {
        Self { config: config.into(), out: None, cache: None, threads: 1, seed: None }
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub status: Status,
    pub report_path: PathBuf,
    pub document: Value,
}

impl RunSummary {
    pub fn exit_code(&self) -> u8 {
        match self.status {
            Status::Pass | Status::Unchecked => 0,
            Status::Fail => 1,
            Status::Error => 3,
        }
    }
}

/// Runs one experiment config.
///
/// Config and I/O problems return `Err` without writing anything. A numeric
/// failure still produces a report with status `error`.
pub fn run(opts: &RunOptions) -> Result<RunSummary, CliError> {
    let cfg = ExperimentConfig::load(&opts.config)?;
    let base_dir = opts.config.parent().map(Path::to_path_buf).unwrap_or_default();
    let origin = opts.config.display().to_string();
    let ctx = Context::new(cfg, &origin, base_dir.clone(), opts.seed);

    let mut operators = BTreeMap::new();
    for name in ctx.config.operators.keys() {
        operators.insert(name.clone(), ctx.operator(name)?);
    }
    let mut symbols = BTreeMap::new();
    for name in ctx.config.symbols.keys() {
        symbols.insert(name.clone(), ctx.symbol(name)?);
    }
    let config_hash = config_hash(&ctx, &operators, &symbols);

    let out_dir = match (&opts.out, &ctx.config.out) {
        (Some(o), _) => o.clone(),
        (None, Some(o)) => base_dir.join(o),
        (None, None) => PathBuf::from("reports"),
    };
    let cache = Cache::new(opts.cache.clone());
    let env = Env { ctx: &ctx, cache: &cache, threads: opts.threads.max(1), operators: &operators, symbols: &symbols, config_hash: &config_hash };
    let kind = ctx.config.experiment;
    let result = experiments::run(kind, &env);

    let (status, body, tables) = match result {
        Ok(outcome) => (outcome.status(), body(&outcome), outcome.tables),
        Err(e @ CliError::Numeric(_)) => (Status::Error, experiments::error_body(&e), Vec::new()),
        Err(e) => return Err(e),
    };
    let metadata = json!({
        "timestamp_unix": report::timestamp(),
        "config_path": origin,
        "threads": env.threads,
        "cache": {
            "root": cache.root().map(|p| p.display().to_string()),
            "hits": cache.hits(),
            "misses": cache.misses(),
            "warnings": cache.warnings(),
        },
    });
    let header = Header { experiment: kind.name(), config_hash: &config_hash, metadata };
    let mut document = report::document(&header, status, body);
    let report_path = report::write(&out_dir, kind.name(), &mut document, &tables)?;
    Ok(RunSummary { status, report_path, document })
}

fn body(outcome: &Outcome) -> Value {
    json!({ "payload": outcome.payload, "checks": outcome.checks, "flags": outcome.flags })
}

/// SHA-256 over the canonical config and the canonical form of every input it
/// references, so editing a referenced spec file changes the hash.
fn config_hash(
    ctx: &Context,
    operators: &BTreeMap<String, config::ResolvedOperator>,
    symbols: &BTreeMap<String, zdet::spec::SymbolSpec>,
) -> String {
    let mut text = ctx.config.canonical_json();
    for (name, op) in operators {
        text.push_str(&format!("\noperator {name} {}", op.canonical));
    }
    for (name, s) in symbols {
        text.push_str(&format!("\nsymbol {name} {}", serde_json::to_string(s).expect("symbol serializes")));
    }
    sha256_hex(text.as_bytes())
}

/// The deterministic part of a report: everything except `metadata`.
pub fn payload_of(document: &Value) -> Value {
    let mut d = document.clone();
    if let Some(m) = d.as_object_mut() {
        m.remove("metadata");
    }
    d
}
