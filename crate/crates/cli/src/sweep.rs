//! Parameter grids: one full run per cell, run concurrently.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use hyperflock_core::dynamics::{CommWeight, SimConfig};
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::{Map, Value};

use crate::config::{self, ConfigError, Preset};
use crate::output::{self, fmt_f64, RunStatus};
use crate::run::{run_to_dir, RunOutcome};

pub const SUMMARY_CSV: &str = "sweep_summary.csv";
pub const NOT_APPLICABLE: &str = "not applicable";

/// Axes of the grid; an empty axis keeps the base value.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grid {
    pub kappa: Vec<f64>,
    pub n: Vec<usize>,
    pub weight: Vec<CommWeight>,
    /// Replicates per parameter combination.
    pub seeds: Option<usize>,
}

/// A sweep file: an optional preset, overrides applied to it, and the grid.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepPlan {
    pub preset: Option<Preset>,
    pub base: Map<String, Value>,
    pub grid: Grid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub index: usize,
    pub config: SimConfig,
}

impl Cell {
    pub fn dir_name(&self) -> String {
        format!("cell_{:04}", self.index)
    }
}

/// Seed of cell `index`: the base seed advanced by the cell index, so a
/// one-cell grid reproduces the plain run exactly.
pub fn cell_seed(base: u64, index: usize) -> u64 {
    base.wrapping_add(index as u64)
}

pub fn load(path: &Path) -> Result<Vec<Cell>, ConfigError> {
    let origin = path.display().to_string();
    let plan: SweepPlan = serde_path_to_error::deserialize(config::read_json(path)?).map_err(|e| ConfigError::Key {
        origin: origin.clone(),
        key: e.path().to_string(),
        message: e.into_inner().to_string(),
    })?;
    expand(&plan, &origin)
}

/// Cells in kappa-major, then n, weight and replicate order.
pub fn expand(plan: &SweepPlan, origin: &str) -> Result<Vec<Cell>, ConfigError> {
    let mut base = plan.preset.map(config::preset_value).unwrap_or_default();
    config::merge(&mut base, plan.base.clone());
    let base_cfg = config::from_value(Value::Object(base.clone()), origin)?;

    let axis = |v: &[Value], fallback: Value| if v.is_empty() { vec![fallback] } else { v.to_vec() };
    let kappas =
        axis(&plan.grid.kappa.iter().map(|k| Value::from(*k)).collect::<Vec<_>>(), Value::from(base_cfg.kappa));
    let ns = axis(&plan.grid.n.iter().map(|n| Value::from(*n)).collect::<Vec<_>>(), Value::from(base_cfg.n));
    let to_json = |w: &CommWeight| serde_json::to_value(w).expect("weights serialize");
    let weights = axis(&plan.grid.weight.iter().map(to_json).collect::<Vec<_>>(), to_json(&base_cfg.weight));
    let replicates = plan.grid.seeds.unwrap_or(1);
    if replicates == 0 {
        return Err(ConfigError::Key {
            origin: origin.into(),
            key: "grid.seeds".into(),
            message: "must be at least 1".into(),
        });
    }

    let mut cells = Vec::new();
    for kappa in &kappas {
        for n in &ns {
            for weight in &weights {
                for _ in 0..replicates {
                    let index = cells.len();
                    let mut cfg = base.clone();
                    cfg.insert("kappa".into(), kappa.clone());
                    cfg.insert("n".into(), n.clone());
                    cfg.insert("weight".into(), weight.clone());
                    cfg.insert("seed".into(), Value::from(cell_seed(base_cfg.seed, index)));
                    let config = config::from_value(Value::Object(cfg), &format!("{origin} (cell {index})"))?;
                    cells.push(Cell { index, config });
                }
            }
        }
    }
    Ok(cells)
}

#[derive(Debug)]
pub struct CellResult {
    pub cell: Cell,
    pub dir: PathBuf,
    pub outcome: anyhow::Result<RunOutcome>,
}

impl CellResult {
    pub fn ok(&self) -> bool {
        matches!(&self.outcome, Ok(o) if o.status.is_completed())
    }
}

/// Runs every cell on a pool of `jobs` threads (all cores when `None`),
/// then writes the summary.
pub fn run(cells: Vec<Cell>, out: &Path, jobs: Option<usize>) -> anyhow::Result<Vec<CellResult>> {
    std::fs::create_dir_all(out).with_context(|| format!("cannot create output directory {}", out.display()))?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        builder = builder.num_threads(j.max(1));
    }
    let pool = builder.build().context("cannot start worker pool")?;
    let results: Vec<CellResult> = pool.install(|| {
        cells
            .into_par_iter()
            .map(|cell| {
                let dir = out.join(cell.dir_name());
                let outcome = run_to_dir(&cell.config, &dir);
                match &outcome {
                    Ok(o) => log::info!("{}: {}", cell.dir_name(), o.status.label()),
                    Err(e) => log::error!("{}: {e:#}", cell.dir_name()),
                }
                CellResult { cell, dir, outcome }
            })
            .collect()
    });
    let path = out.join(SUMMARY_CSV);
    let mut w = output::create(&path)?;
    w.write_all(summary(&results).as_bytes())
        .and_then(|_| w.flush())
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(results)
}

pub const SUMMARY_COLUMNS: [&str; 13] = [
    "cell",
    "kappa",
    "n",
    "weight",
    "seed",
    "status",
    "t_final",
    "final_energy",
    "final_max_misalign",
    "final_det_123",
    "max_energy_increase",
    "alignment_ratio",
    "bound_chain_max",
];

pub fn summary(results: &[CellResult]) -> String {
    let mut s = SUMMARY_COLUMNS.join(",");
    s.push('\n');
    for r in results {
        let c = &r.cell.config;
        let _ = write!(s, "{},{},{},{},{}", r.cell.index, fmt_f64(c.kappa), c.n, c.weight.name(), c.seed);
        let fields: Vec<String> = match &r.outcome {
            Err(e) => {
                let mut v = vec![format!("\"io error: {}\"", format!("{e:#}").replace('"', "'"))];
                v.extend((0..7).map(|_| fmt_f64(f64::NAN)));
                v
            }
            Ok(o) => summary_fields(o),
        };
        let _ = writeln!(s, ",{}", fields.join(","));
    }
    s
}

fn summary_fields(o: &RunOutcome) -> Vec<String> {
    let last = o.last.as_ref();
    let get = |f: fn(&hyperflock_core::diagnostics::DiagRecord) -> f64| fmt_f64(last.map(f).unwrap_or(f64::NAN));
    let det = last.and_then(|r| r.coplanarity.iter().find(|c| c.0 == [1, 2, 3])).map(|c| c.1).unwrap_or(f64::NAN);
    let applicable = last.is_none_or(|r| r.alignment_applicable);
    let (ratio, chain) = if applicable {
        let ratio = match (&o.first, last) {
            (Some(a), Some(b)) => b.max_misalign / a.max_misalign,
            _ => f64::NAN,
        };
        (fmt_f64(ratio), fmt_f64(last.and_then(|r| r.bound_chain_residual).unwrap_or(f64::NAN)))
    } else {
        (NOT_APPLICABLE.to_string(), NOT_APPLICABLE.to_string())
    };
    let status = match &o.status {
        RunStatus::Completed => "completed".to_string(),
        RunStatus::BlowUp { t, particle } => format!("blow_up(t={t};particle={particle})"),
        RunStatus::Error { .. } => "error".to_string(),
    };
    vec![
        status,
        get(|r| r.t),
        get(|r| r.energy),
        get(|r| r.max_misalign),
        fmt_f64(det),
        fmt_f64(o.max_energy_increase),
        ratio,
        chain,
    ]
}
