//! Run artifacts: the diagnostics CSV, the manifest and the final state.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::Context;
use hyperflock_core::diagnostics::DiagRecord;
use hyperflock_core::dynamics::{DiagnosticSink, FlockState, SimConfig};
use serde::{Deserialize, Serialize};

pub const RUN_CSV: &str = "run.csv";
pub const MANIFEST_JSON: &str = "manifest.json";
pub const FINAL_STATE_JSON: &str = "final_state.json";

/// Leading columns, before the determinant columns.
pub const HEAD_COLUMNS: [&str; 6] = ["t", "energy", "log10_energy", "max_misalign", "max_dist", "constraint_drift"];
/// Trailing columns, after the determinant columns.
pub const TAIL_COLUMNS: [&str; 6] =
    ["lemma41_max", "lemma43_residual", "speed_min", "speed_max", "dissipation_residual", "dissipation_rate"];

/// `det_123` for single-digit indices, `det_1_2_10` otherwise.
pub fn det_column([i, j, k]: [usize; 3]) -> String {
    if i < 10 && j < 10 && k < 10 {
        format!("det_{i}{j}{k}")
    } else {
        format!("det_{i}_{j}_{k}")
    }
}

pub fn header(triples: &[[usize; 3]]) -> Vec<String> {
    HEAD_COLUMNS
        .iter()
        .map(|c| c.to_string())
        .chain(triples.iter().map(|&t| det_column(t)))
        .chain(TAIL_COLUMNS.iter().map(|c| c.to_string()))
        .collect()
}

/// Seventeen significant digits; missing values as `NaN`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    fmt_f64(x.unwrap_or(f64::NAN))
}

pub fn row(rec: &DiagRecord) -> Vec<String> {
    let mut out = vec![
        fmt_f64(rec.t),
        fmt_f64(rec.energy),
        fmt_f64(rec.energy.log10()),
        fmt_f64(rec.max_misalign),
        fmt_f64(rec.max_dist),
        fmt_f64(rec.constraint_drift),
    ];
    out.extend(rec.coplanarity.iter().map(|c| fmt_f64(c.1)));
    out.extend([
        fmt_f64(rec.lemma41_max),
        fmt_opt(rec.lemma43_residual),
        fmt_f64(rec.speed.min),
        fmt_f64(rec.speed.max),
        fmt_opt(rec.dissipation_residual),
        fmt_f64(rec.dissipation_rate),
    ]);
    out
}

/// Streams records to CSV and keeps the summary the sweep needs.
pub struct CsvSink<W: Write> {
    out: W,
    error: Option<io::Error>,
    pub rows: usize,
    pub first: Option<DiagRecord>,
    pub last: Option<DiagRecord>,
    /// Largest `E[k+1] - E[k]` between consecutive records.
    pub max_energy_increase: f64,
}

impl<W: Write> CsvSink<W> {
    /// Writes the header for records carrying `triples`.
    pub fn new(mut out: W, triples: &[[usize; 3]]) -> io::Result<Self> {
        writeln!(out, "{}", header(triples).join(","))?;
        Ok(Self { out, error: None, rows: 0, first: None, last: None, max_energy_increase: f64::NEG_INFINITY })
    }

    /// Flushes and returns the first write error, if any.
    pub fn finish(&mut self) -> io::Result<()> {
        if let Some(e) = self.error.take() {
            return Err(e);
        }
        self.out.flush()
    }
}

impl<W: Write> DiagnosticSink for CsvSink<W> {
    fn record(&mut self, rec: &DiagRecord) {
        if let Some(prev) = &self.last {
            self.max_energy_increase = self.max_energy_increase.max(rec.energy - prev.energy);
        }
        if self.first.is_none() {
            self.first = Some(rec.clone());
        }
        self.last = Some(rec.clone());
        self.rows += 1;
        if self.error.is_none() {
            if let Err(e) = writeln!(self.out, "{}", row(rec).join(",")) {
                self.error = Some(e);
            }
        }
    }
}

/// How a run ended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    BlowUp { t: f64, particle: usize },
    Error { step: u64, t: f64, message: String },
}

impl RunStatus {
    pub fn is_completed(&self) -> bool {
        matches!(self, RunStatus::Completed)
    }

    /// `completed`, `blow_up` or `error`.
    pub fn label(&self) -> &'static str {
        match self {
            RunStatus::Completed => "completed",
            RunStatus::BlowUp { .. } => "blow_up",
            RunStatus::Error { .. } => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: SimConfig,
    pub seed: u64,
    pub version: String,
    pub rng_algorithm: String,
    pub started_at: String,
    pub finished_at: String,
    pub status: RunStatus,
    pub records: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalState {
    pub t: f64,
    pub x: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
}

impl From<&FlockState> for FinalState {
    fn from(s: &FlockState) -> Self {
        Self { t: s.t(), x: s.positions_nested(), v: s.velocities_nested() }
    }
}

pub fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).with_context(|| format!("cannot write {}", path.display()))?;
    writeln!(w).and_then(|_| w.flush()).with_context(|| format!("cannot write {}", path.display()))
}
