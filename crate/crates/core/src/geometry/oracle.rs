//! Chart-coordinate ODE oracles for the closed-form geodesic and transport formulas.
//!
//! In the chart `u -> (sqrt(1+|u|^2), u)` the metric is
//! `g_ij(u) = delta_ij - u^i u^j / (1 + |u|^2)` with Christoffel symbols
//! `Gamma^k_ij(u) = -u^k g_ij(u)`. The oracles integrate the geodesic and
//! parallel-transport equations in these coordinates with classical RK4 and
//! never touch the closed forms they are meant to check.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{geodesic_distance, log_map};
use crate::minkowski::{tangent_norm, HPoint, HTangent, MVec};
use crate::ode::{step_count, Rk4};

/// Default oracle step per unit arclength.
pub const DEFAULT_ORACLE_STEP: f64 = 1e-4;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `g_ij(u)`.
pub fn chart_metric(u: &[f64], i: usize, j: usize) -> f64 {
    let delta = if i == j { 1.0 } else { 0.0 };
    delta - u[i] * u[j] / (1.0 + dot(u, u))
}

/// `g^ij(u) = delta_ij + u^i u^j`.
pub fn chart_inverse_metric(u: &[f64], i: usize, j: usize) -> f64 {
    let delta = if i == j { 1.0 } else { 0.0 };
    delta + u[i] * u[j]
}

/// `Gamma^k_ij(u) = -u^k g_ij(u)`.
pub fn christoffel(u: &[f64], k: usize, i: usize, j: usize) -> f64 {
    -u[k] * chart_metric(u, i, j)
}

/// `g(a, b)` at chart point `u` for chart-component tangent vectors.
pub fn chart_inner(u: &[f64], a: &[f64], b: &[f64]) -> f64 {
    dot(a, b) - dot(u, a) * dot(u, b) / (1.0 + dot(u, u))
}

/// `-Gamma^k_ij a^i b^j`, the geodesic-equation acceleration term.
fn christoffel_contract(u: &[f64], a: &[f64], b: &[f64], out: &mut [f64]) {
    let d = u.len();
    for k in 0..d {
        let mut acc = 0.0;
        for i in 0..d {
            for j in 0..d {
                acc -= christoffel(u, k, i, j) * a[i] * b[j];
            }
        }
        out[k] = acc;
    }
}

/// Endpoint of a chart-geodesic integration.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartGeodesicEnd {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    /// Largest deviation of `g(u', u')` from its initial value along the run.
    pub speed_sq_drift: f64,
}

/// Integrates `u''^k + Gamma^k_ij u'^i u'^j = 0` from `(u0, udot0)` over arclength `s`.
pub fn chart_geodesic_oracle(u0: &[f64], udot0: &[f64], s: f64, h: f64) -> Result<ChartGeodesicEnd> {
    let d = u0.len();
    if udot0.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: udot0.len() });
    }
    if !(h > 0.0) || !s.is_finite() {
        return Err(Error::OracleFailure { reason: "step must be positive and span finite" });
    }
    let mut y: Vec<f64> = u0.iter().chain(udot0).copied().collect();
    let e0 = chart_inner(u0, udot0, udot0);
    let mut drift: f64 = 0.0;
    let n = step_count(libm::fabs(s), h);
    let step = if n > 0 { s / n as f64 } else { 0.0 };
    let mut rk = Rk4::new(2 * d);
    for i in 0..n {
        rk.step(i as f64 * step, step, &mut y, |_, y, dy| {
            let (u, ud) = y.split_at(d);
            dy[..d].copy_from_slice(ud);
            christoffel_contract(u, ud, ud, &mut dy[d..]);
        });
        if y.iter().any(|c| !c.is_finite()) {
            return Err(Error::OracleFailure { reason: "chart geodesic overflowed" });
        }
        let (u, ud) = y.split_at(d);
        drift = drift.max(libm::fabs(chart_inner(u, ud, ud) - e0));
    }
    let (u, ud) = y.split_at(d);
    Ok(ChartGeodesicEnd { position: u.to_vec(), velocity: ud.to_vec(), speed_sq_drift: drift })
}

/// Parallel transport of `v` from `p` to `q` by integrating
/// `u'^k + Gamma^k_ij x'^i u^j = 0` jointly with the chart geodesic equation.
pub fn transport_ode_oracle(p: &HPoint, q: &HPoint, v: &HTangent, h: f64) -> Result<HTangent> {
    let d = p.dim();
    if q.dim() != d || v.vec().dim() != d {
        return Err(Error::DimensionMismatch { expected: d + 1, found: q.dim() + 1 });
    }
    if !(h > 0.0) {
        return Err(Error::OracleFailure { reason: "step must be positive" });
    }
    let length = geodesic_distance(p, q);
    if length == 0.0 {
        return Ok(HTangent::from_parts_unchecked(q.clone(), v.vec().clone()));
    }
    let log = log_map(p, q)?;
    let speed = tangent_norm(&log)?;
    // state: chart position, chart velocity (unit speed), transported chart components
    let mut y = Vec::with_capacity(3 * d);
    y.extend_from_slice(p.chart());
    y.extend(log.as_slice()[1..].iter().map(|c| c / speed));
    y.extend_from_slice(&v.as_slice()[1..]);

    let n = step_count(length, h);
    let step = length / n as f64;
    let mut rk = Rk4::new(3 * d);
    for i in 0..n {
        rk.step(i as f64 * step, step, &mut y, |_, y, dy| {
            let (x, rest) = y.split_at(d);
            let (xd, u) = rest.split_at(d);
            dy[..d].copy_from_slice(xd);
            christoffel_contract(x, xd, xd, &mut dy[d..2 * d]);
            christoffel_contract(x, xd, u, &mut dy[2 * d..]);
        });
        if y.iter().any(|c| !c.is_finite()) {
            return Err(Error::OracleFailure { reason: "transport ODE overflowed" });
        }
    }
    let x = &y[..d];
    let u = &y[2 * d..];
    let x0 = libm::sqrt(1.0 + dot(x, x));
    let mut embedded = Vec::with_capacity(d + 1);
    embedded.push(dot(x, u) / x0);
    embedded.extend_from_slice(u);
    Ok(HTangent::from_parts_unchecked(q.clone(), MVec::from_vec_unchecked(embedded)))
}
