//! One simulation written to an output directory.

use std::fs;
use std::path::Path;

use anyhow::Context;
use hyperflock_core::diagnostics::DiagRecord;
use hyperflock_core::dynamics::{simulate, FlockState, SimConfig, RNG_ALGORITHM};
use hyperflock_core::Error as CoreError;

use crate::output::{self, CsvSink, FinalState, RunManifest, RunStatus};

pub const VERSION: &str = concat!("hyperflock ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub final_state: Option<FlockState>,
    pub records: usize,
    pub first: Option<DiagRecord>,
    pub last: Option<DiagRecord>,
    pub max_energy_increase: f64,
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// Runs `cfg`, writing `run.csv`, `final_state.json` and `manifest.json`
/// under `out`. The manifest is written whatever the run's outcome; an
/// `Err` means an artifact could not be written.
pub fn run_to_dir(cfg: &SimConfig, out: &Path) -> anyhow::Result<RunOutcome> {
    fs::create_dir_all(out).with_context(|| format!("cannot create output directory {}", out.display()))?;
    let started_at = now();
    let csv_path = out.join(output::RUN_CSV);
    let triples = cfg.coplanarity_triples().unwrap_or_default();
    let mut sink = CsvSink::new(output::create(&csv_path)?, &triples)
        .with_context(|| format!("cannot write {}", csv_path.display()))?;

    log::info!("running n = {}, d = {}, kappa = {}, {} steps", cfg.n, cfg.dim, cfg.kappa, cfg.steps());
    let result = simulate(cfg, &mut sink);
    sink.finish().with_context(|| format!("cannot write {}", csv_path.display()))?;

    let (status, final_state) = match result {
        Ok(state) => (RunStatus::Completed, Some(state)),
        Err(e) => {
            log::error!("{e}");
            let status = match e.source {
                CoreError::BlowUp { t, particle } => RunStatus::BlowUp { t, particle },
                ref other => RunStatus::Error { step: e.step, t: e.t, message: other.to_string() },
            };
            (status, e.last_state.map(|b| *b))
        }
    };
    if let Some(state) = &final_state {
        output::write_json(&out.join(output::FINAL_STATE_JSON), &FinalState::from(state))?;
    }
    let manifest = RunManifest {
        config: cfg.clone(),
        seed: cfg.seed,
        version: VERSION.into(),
        rng_algorithm: RNG_ALGORITHM.into(),
        started_at,
        finished_at: now(),
        status: status.clone(),
        records: sink.rows,
    };
    output::write_json(&out.join(output::MANIFEST_JSON), &manifest)?;
    Ok(RunOutcome {
        status,
        final_state,
        records: sink.rows,
        first: sink.first,
        last: sink.last,
        max_energy_increase: sink.max_energy_increase,
    })
}
