use alloc::boxed::Box;
use alloc::vec::Vec;

use super::init::Initializer;
use super::integrate::HcsIntegrator;
use super::state::FlockState;
use super::weight::CommWeight;
use crate::diagnostics::{energy, DiagConfig, DiagPlan, DiagRecord};
use crate::error::{Error, Result};
use crate::minkowski::{mdot, DEFAULT_CONSTRAINT_TOL, OVERFLOW_GUARD_X0};
use crate::ode::step_count;

/// Whether points and velocities are projected back after each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Projection {
    #[default]
    On,
    Off,
}

#[cfg(feature = "serde")]
fn default_sample_every() -> u64 {
    100
}

#[cfg(feature = "serde")]
fn default_tol() -> f64 {
    DEFAULT_CONSTRAINT_TOL
}

/// A complete description of one run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct SimConfig {
    pub n: usize,
    pub dim: usize,
    pub kappa: f64,
    #[cfg_attr(feature = "serde", serde(default = "unit_weight"))]
    pub weight: CommWeight,
    pub dt: f64,
    pub t_end: f64,
    #[cfg_attr(feature = "serde", serde(default = "default_sample_every"))]
    pub sample_every: u64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub seed: u64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub initializer: Initializer,
    #[cfg_attr(feature = "serde", serde(default))]
    pub projection: Projection,
    #[cfg_attr(feature = "serde", serde(default = "default_tol"))]
    pub constraint_tol: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub diagnostics: DiagConfig,
}

#[cfg(feature = "serde")]
fn unit_weight() -> CommWeight {
    CommWeight::UNIT
}

impl SimConfig {
    /// The flocking-to-rest setup: unit weight, ten particles on `H^2`,
    /// `kappa = 1`, `dt = 1e-3` up to `t = 200`.
    pub fn fig1(seed: u64) -> Self {
        Self {
            n: 10,
            dim: 2,
            kappa: 1.0,
            weight: CommWeight::UNIT,
            dt: 1e-3,
            t_end: 200.0,
            sample_every: 100,
            seed,
            initializer: Initializer::default(),
            projection: Projection::On,
            constraint_tol: DEFAULT_CONSTRAINT_TOL,
            diagnostics: DiagConfig::default(),
        }
    }

    /// Geodesic initial data with the `cosh d` weight: five particles within
    /// chart radius 1 on one geodesic of `H^2`, `dt = 1e-4` up to `t = 10`.
    pub fn geodesic_hk(seed: u64) -> Self {
        Self {
            n: 5,
            weight: CommWeight::CoshDistance,
            dt: 1e-4,
            t_end: 10.0,
            initializer: Initializer::RandomGeodesic { radius: 1.0, velocity_scale: 1.0 },
            ..Self::fig1(seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &'static str, reason: &str| Err(Error::InvalidConfig { key, reason: reason.into() });
        if self.n == 0 {
            return bad("n", "must be at least 1");
        }
        if self.dim == 0 {
            return bad("dim", "must be at least 1");
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return bad("kappa", "must be finite and > 0");
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt", "must be finite and > 0");
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad("t_end", "must be finite and >= 0");
        }
        if self.sample_every == 0 {
            return bad("sample_every", "must be at least 1");
        }
        if !(self.constraint_tol > 0.0) {
            return bad("constraint_tol", "must be > 0");
        }
        self.weight.validate()?;
        if let Initializer::RandomBall { radius, velocity_scale }
        | Initializer::RandomGeodesic { radius, velocity_scale } = self.initializer
        {
            if !(radius >= 0.0 && radius.is_finite()) {
                return bad("initializer.radius", "must be finite and >= 0");
            }
            if !(velocity_scale >= 0.0 && velocity_scale.is_finite()) {
                return bad("initializer.velocity_scale", "must be finite and >= 0");
            }
        }
        Ok(())
    }

    /// Number of integration steps.
    pub fn steps(&self) -> u64 {
        step_count(self.t_end, self.dt) as u64
    }

    pub fn integrator(&self) -> HcsIntegrator {
        HcsIntegrator::new(self.kappa, self.weight, self.projection == Projection::On)
    }

    pub fn initial_state(&self) -> Result<FlockState> {
        self.initializer.build(self.n, self.dim, self.seed, self.constraint_tol)
    }

    /// 1-based particle triples whose determinants each record carries.
    pub fn coplanarity_triples(&self) -> Result<Vec<[usize; 3]>> {
        if self.dim != 2 {
            return Ok(Vec::new());
        }
        self.diagnostics.triples.resolve(self.n, self.diag_seed())
    }

    fn diag_seed(&self) -> u64 {
        self.seed.wrapping_add(1)
    }
}

/// Receives diagnostic records in time order.
pub trait DiagnosticSink {
    fn record(&mut self, rec: &DiagRecord);
}

impl<F: FnMut(&DiagRecord)> DiagnosticSink for F {
    fn record(&mut self, rec: &DiagRecord) {
        self(rec)
    }
}

impl DiagnosticSink for Vec<DiagRecord> {
    fn record(&mut self, rec: &DiagRecord) {
        self.push(rec.clone());
    }
}

/// A failed run: the step and time of failure, the cause, and the last
/// valid state when one exists.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("run failed at step {step} (t = {t}): {source}")]
pub struct RunError {
    pub step: u64,
    pub t: f64,
    pub source: Error,
    pub last_state: Option<Box<FlockState>>,
}

/// Runs `cfg` to completion, sending a record to `sink` at step 0, every
/// `sample_every` steps and at the final step.
pub fn simulate(cfg: &SimConfig, sink: &mut dyn DiagnosticSink) -> core::result::Result<FlockState, RunError> {
    let fail = |step: u64, t: f64, source: Error, last: Option<&FlockState>| RunError {
        step,
        t,
        source,
        last_state: last.map(|s| Box::new(s.clone())),
    };
    cfg.validate().map_err(|e| fail(0, 0.0, e, None))?;
    let mut state = cfg.initial_state().map_err(|e| fail(0, 0.0, e, None))?;
    let plan = DiagPlan::new(&cfg.diagnostics, cfg.kappa, cfg.weight, &state, cfg.diag_seed())
        .map_err(|e| fail(0, 0.0, e, None))?;
    let mut integ = cfg.integrator();
    let mut peek = cfg.integrator();
    let projected = cfg.projection == Projection::On;
    let steps = cfg.steps();
    let mut warned = false;

    let mut emit = |step: u64, state: &FlockState, sink: &mut dyn DiagnosticSink| -> Result<()> {
        if projected {
            check_scaled(state, cfg.constraint_tol)?;
        }
        let mut rec = plan.record(step, state);
        if cfg.diagnostics.dissipation {
            rec.dissipation_residual = centered_rate(&mut peek, state, cfg.dt).map(|r| r - rec.dissipation_rate);
        }
        sink.record(&rec);
        Ok(())
    };

    emit(0, &state, sink).map_err(|e| fail(0, state.t(), e, Some(&state)))?;
    for step in 1..=steps {
        let before = state.clone();
        integ.step_by(&mut state, cfg.dt).map_err(|e| fail(step, before.t() + cfg.dt, e, Some(&before)))?;
        state.set_t(step as f64 * cfg.dt);
        if !warned && state.max_x0() > OVERFLOW_GUARD_X0 {
            warned = true;
            log::warn!(
                "x^0 exceeded {OVERFLOW_GUARD_X0:e} at t = {}; Minkowski products lose accuracy at this scale",
                state.t()
            );
        }
        if cfg!(debug_assertions) && projected {
            check_scaled(&state, cfg.constraint_tol).map_err(|e| fail(step, state.t(), e, Some(&before)))?;
        }
        if step % cfg.sample_every == 0 || step == steps {
            emit(step, &state, sink).map_err(|e| fail(step, state.t(), e, Some(&state)))?;
        }
    }
    Ok(state)
}

/// `(E(t + h) - E(t - h)) / 2h` from one integrator step each way.
fn centered_rate(integ: &mut HcsIntegrator, state: &FlockState, h: f64) -> Option<f64> {
    let mut fwd = state.clone();
    let mut bwd = state.clone();
    integ.step_by(&mut fwd, h).ok()?;
    integ.step_by(&mut bwd, -h).ok()?;
    Some((energy(&fwd) - energy(&bwd)) / (2.0 * h))
}

/// Constraint check with the tolerance scaled by `(x^0)^2`, the magnitude of
/// the terms cancelling in `<x,x>_M`.
fn check_scaled(state: &FlockState, tol: f64) -> Result<()> {
    for i in 0..state.n() {
        let (x, v) = (state.position(i), state.velocity(i));
        let scale = (x[0] * x[0]).max(1.0);
        let r = libm::fabs(mdot(x, x) + 1.0).max(libm::fabs(mdot(x, v)) / libm::sqrt(mdot(v, v).max(1.0)));
        if !(r <= tol * scale) {
            return Err(Error::StateCorruption { particle: i, residual: r });
        }
    }
    Ok(())
}
