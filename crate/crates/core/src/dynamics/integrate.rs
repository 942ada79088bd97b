use alloc::vec::Vec;

use super::hcs::field;
use super::state::FlockState;
use super::weight::CommWeight;
use crate::error::{Error, Result};
use crate::minkowski::{project_point_in_place, project_tangent_in_place};
use crate::ode::Rk4;

/// Classical RK4 on the flat `(x, v)` vector followed, when enabled, by a
/// radial projection of every point and a tangential projection of every
/// velocity at the projected point.
#[derive(Debug, Clone)]
pub struct HcsIntegrator {
    kappa: f64,
    weight: CommWeight,
    projection: bool,
    rk: Rk4,
    y: Vec<f64>,
}

impl HcsIntegrator {
    pub fn new(kappa: f64, weight: CommWeight, projection: bool) -> Self {
        Self { kappa, weight, projection, rk: Rk4::new(0), y: Vec::new() }
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn weight(&self) -> &CommWeight {
        &self.weight
    }

    pub fn projection(&self) -> bool {
        self.projection
    }

    /// Advances `state` by `h`, which may be negative.
    pub fn step_by(&mut self, state: &mut FlockState, h: f64) -> Result<()> {
        let half = state.x.len();
        if self.y.len() != 2 * half {
            self.y = alloc::vec![0.0; 2 * half];
            self.rk = Rk4::new(2 * half);
        }
        self.y[..half].copy_from_slice(&state.x);
        self.y[half..].copy_from_slice(&state.v);
        let (dim, kappa, weight) = (state.dim, self.kappa, self.weight);
        self.rk.step(state.t, h, &mut self.y, |_, y, dy| field(dim, kappa, &weight, y, dy));
        let t = state.t + h;

        let w = dim + 1;
        let (x, v) = self.y.split_at_mut(half);
        for i in 0..half / w {
            let (xi, vi) = (&mut x[i * w..(i + 1) * w], &mut v[i * w..(i + 1) * w]);
            if self.projection {
                project_point_in_place(xi).map_err(|_| Error::BlowUp { t, particle: i })?;
                project_tangent_in_place(xi, vi);
            }
            if xi.iter().chain(vi.iter()).any(|c| !c.is_finite()) {
                return Err(Error::BlowUp { t, particle: i });
            }
        }
        state.x.copy_from_slice(x);
        state.v.copy_from_slice(v);
        state.t = t;
        Ok(())
    }
}

/// One projected RK4 step of size `dt`, returning the new state.
pub fn rk4_step(state: &FlockState, kappa: f64, weight: &CommWeight, dt: f64, projection: bool) -> Result<FlockState> {
    let mut next = state.clone();
    HcsIntegrator::new(kappa, *weight, projection).step_by(&mut next, dt)?;
    Ok(next)
}
