//! File formats: instance JSON, query transcripts and exact-number JSON.

use std::path::Path;

use kcomp_core::instance::{Point, TabularInstance};
use kcomp_core::num::to_f64;
use kcomp_core::oracle::TranscriptRecord;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointRecord {
    pub id: String,
    pub coord: Option<f64>,
}

/// `{"points": [{"id", "coord"}], "weights": [..], "utility": [[u0, u1], ..]}`.
///
/// Numbers are written in shortest round-trip form, so reading a written
/// file gives back the same `f64` values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub points: Vec<PointRecord>,
    pub weights: Vec<f64>,
    pub utility: Vec<[f64; 2]>,
}

impl InstanceFile {
    pub fn from_instance(instance: &TabularInstance) -> Self {
        Self {
            points: instance.points().iter().map(|p| PointRecord { id: p.id.clone(), coord: p.coord }).collect(),
            weights: instance.weights().iter().map(to_f64).collect(),
            utility: instance.utility().iter().map(|[a, b]| [to_f64(a), to_f64(b)]).collect(),
        }
    }

    pub fn to_instance(&self) -> Result<TabularInstance, CliError> {
        let points = self.points.iter().map(|p| Point::new(p.id.clone(), p.coord)).collect();
        Ok(TabularInstance::from_f64(points, &self.weights, &self.utility)?)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read instance {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("instance {}: {e}", path.display())))
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self).expect("instance serializes");
        std::fs::write(path, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }
}

/// One transcript line: `{"phase", "c", "truth", "response"}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptLine {
    pub phase: String,
    pub c: Vec<i64>,
    pub truth: u8,
    pub response: u8,
}

impl From<&TranscriptRecord> for TranscriptLine {
    fn from(r: &TranscriptRecord) -> Self {
        Self { phase: r.phase.name().to_string(), c: r.coeffs.clone(), truth: u8::from(r.truth), response: u8::from(r.response) }
    }
}

/// JSON lines, one per oracle call.
pub fn transcript_jsonl(records: &[TranscriptRecord]) -> Vec<u8> {
    let mut out = Vec::new();
    for r in records {
        serde_json::to_writer(&mut out, &TranscriptLine::from(r)).expect("line serializes");
        out.push(b'\n');
    }
    out
}
