//! Writing run artifacts: the sweep CSV, extra files and the manifest.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use kcomp_core::num::to_f64;
use kcomp_core::oracle::{Phase, QueryLedger};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::experiment::{RunOutput, SweepRecord};
use crate::seed::hash_hex;
use crate::CliError;

pub const CSV_HEADER: [&str; 6] = ["k", "trial", "excess_risk", "est_error", "queries", "wall_ms"];
pub const RECORDS_FILE: &str = "records.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

pub fn records_csv(records: &[SweepRecord]) -> Result<Vec<u8>, CliError> {
    let io = |e: csv::Error| CliError::Io(e.to_string());
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in records {
        w.write_record([
            r.k.to_string(),
            r.trial.to_string(),
            to_f64(&r.excess_risk).to_string(),
            to_f64(&r.est_error).to_string(),
            r.queries.to_string(),
            r.wall_ms.to_string(),
        ])
        .map_err(io)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

/// `(k, est_error)` pairs from a sweep CSV.
pub fn read_errors(path: &Path) -> Result<Vec<(usize, f64)>, CliError> {
    let bad = |msg: String| CliError::Config(format!("{}: {msg}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let headers = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    let column = |name: &str| headers.iter().position(|h| h == name).ok_or_else(|| bad(format!("missing column {name}")));
    let (k_col, e_col) = (column("k")?, column("est_error")?);
    let mut out = Vec::new();
    for (line, row) in reader.records().enumerate() {
        let row = row.map_err(|e| bad(e.to_string()))?;
        let k = row[k_col].parse().map_err(|e| bad(format!("row {}: k: {e}", line + 1)))?;
        let err = row[e_col].parse().map_err(|e| bad(format!("row {}: est_error: {e}", line + 1)))?;
        out.push((k, err));
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub config_sha256: String,
    pub version: String,
    pub experiment: String,
    pub seed: u64,
    pub trials: usize,
    pub k: Vec<usize>,
    pub queries: BTreeMap<String, u64>,
    pub queries_total: u64,
    pub files: Vec<String>,
    pub warnings: Vec<String>,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

pub fn ledger_totals(ledger: &QueryLedger) -> BTreeMap<String, u64> {
    Phase::ALL.iter().map(|&p| (p.name().to_string(), ledger.count(p))).collect()
}

/// Writes every artifact under `dir` and returns the manifest.
pub fn write_run(config: &ExperimentConfig, output: &RunOutput, dir: &Path) -> Result<Manifest, CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut files = Vec::new();
    if !output.records.is_empty() {
        std::fs::write(dir.join(RECORDS_FILE), records_csv(&output.records)?).map_err(io)?;
        files.push(RECORDS_FILE.to_string());
    }
    for a in &output.artifacts {
        std::fs::write(dir.join(&a.name), &a.contents).map_err(io)?;
        files.push(a.name.clone());
    }
    files.push(MANIFEST_FILE.to_string());
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let manifest = Manifest {
        config_sha256: hash_hex(config.to_toml().as_bytes()),
        version: env!("CARGO_PKG_VERSION").to_string(),
        experiment: config.experiment.name().to_string(),
        seed: config.seed,
        trials: config.trials,
        k: config.k.clone(),
        queries: ledger_totals(&output.ledger),
        queries_total: output.ledger.total(),
        files,
        warnings: output.warnings.clone(),
        timestamp,
    };
    let mut text = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    text.push(b'\n');
    std::fs::write(dir.join(MANIFEST_FILE), text).map_err(io)?;
    Ok(manifest)
}
