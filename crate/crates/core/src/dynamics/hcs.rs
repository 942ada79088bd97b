use alloc::vec;
use alloc::vec::Vec;

use super::state::FlockState;
use super::weight::CommWeight;
use crate::error::Result;
use crate::minkowski::{mdot, DEFAULT_CONSTRAINT_TOL};

/// Drift accepted by [`hcs_rhs`] before it refuses the state.
pub const RHS_CORRUPTION_TOL: f64 = 1e3 * DEFAULT_CONSTRAINT_TOL;

/// Velocities and accelerations of the flocking system at a valid state.
///
/// `xdot_i = v_i` and
/// `vdot_i = |v_i|^2 x_i + (kappa/N) sum_j psi(x_i,x_j) (v_j - v_i + <x_i,v_j>/(1 - <x_i,x_j>) (x_i + x_j))`.
pub fn hcs_rhs(state: &FlockState, kappa: f64, weight: &CommWeight) -> Result<(Vec<f64>, Vec<f64>)> {
    state.check_constraints(RHS_CORRUPTION_TOL)?;
    let mut dv = vec![0.0; state.v.len()];
    field_accel(state.dim, kappa, weight, &state.x, &state.v, &mut dv);
    Ok((state.v.clone(), dv))
}

/// The alignment part `(kappa/N) sum_j psi (P_ij v_j - v_i)` alone, per particle.
pub fn coupling_terms(state: &FlockState, kappa: f64, weight: &CommWeight) -> Vec<f64> {
    let mut out = vec![0.0; state.v.len()];
    coupling(state.dim, kappa, weight, &state.x, &state.v, &mut out);
    out
}

/// Flat-slice field on `y = [x | v]`, used by the integrator at RK4 stages
/// where the constraints hold only to the local truncation error.
pub(crate) fn field(dim: usize, kappa: f64, weight: &CommWeight, y: &[f64], dy: &mut [f64]) {
    let half = y.len() / 2;
    let (x, v) = y.split_at(half);
    let (dx, dv) = dy.split_at_mut(half);
    dx.copy_from_slice(v);
    field_accel(dim, kappa, weight, x, v, dv);
}

fn field_accel(dim: usize, kappa: f64, weight: &CommWeight, x: &[f64], v: &[f64], dv: &mut [f64]) {
    coupling(dim, kappa, weight, x, v, dv);
    let w = dim + 1;
    for i in 0..x.len() / w {
        let (xi, vi) = (&x[i * w..(i + 1) * w], &v[i * w..(i + 1) * w]);
        let speed_sq = mdot(vi, vi);
        for k in 0..w {
            dv[i * w + k] += speed_sq * xi[k];
        }
    }
}

fn coupling(dim: usize, kappa: f64, weight: &CommWeight, x: &[f64], v: &[f64], out: &mut [f64]) {
    let w = dim + 1;
    let n = x.len() / w;
    let scale = kappa / n as f64;
    out.iter_mut().for_each(|c| *c = 0.0);
    for i in 0..n {
        let (xi, vi) = (&x[i * w..(i + 1) * w], &v[i * w..(i + 1) * w]);
        let acc = &mut out[i * w..(i + 1) * w];
        for j in 0..n {
            let (xj, vj) = (&x[j * w..(j + 1) * w], &v[j * w..(j + 1) * w]);
            let psi = weight.eval(xi, xj);
            let coef = mdot(xi, vj) / (1.0 - mdot(xi, xj));
            for k in 0..w {
                acc[k] += psi * (vj[k] - vi[k] + coef * (xi[k] + xj[k]));
            }
        }
        acc.iter_mut().for_each(|c| *c *= scale);
    }
}
