//! The hyperbolic Kuramoto model and the reduction of geodesic flocks to it.

use alloc::vec;
use alloc::vec::Vec;

use super::state::FlockState;
use crate::error::{Error, Result};
use crate::geometry::Geodesic;
use crate::minkowski::mdot;
use crate::ode::Rk4;

/// Residual above which a flock is not considered to lie on a geodesic.
pub const REDUCTION_TOL: f64 = 1e-8;

/// First-order state: angles `alpha` and natural frequencies `omega`.
#[derive(Debug, Clone, PartialEq)]
pub struct HkState {
    pub t: f64,
    pub alpha: Vec<f64>,
    pub omega: Vec<f64>,
}

/// Second-order state: angles and their rates.
#[derive(Debug, Clone, PartialEq)]
pub struct HkSecondOrderState {
    pub t: f64,
    pub alpha: Vec<f64>,
    pub alpha_dot: Vec<f64>,
}

fn sinh_sums(alpha: &[f64], out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        *o = alpha.iter().map(|aj| libm::sinh(aj - alpha[i])).sum();
    }
}

/// `alpha_dot_i = omega_i + (kappa/N) sum_j sinh(alpha_j - alpha_i)`.
pub fn hk_rhs_first_order(state: &HkState, kappa: f64) -> Result<Vec<f64>> {
    if state.alpha.len() != state.omega.len() {
        return Err(Error::DimensionMismatch { expected: state.alpha.len(), found: state.omega.len() });
    }
    let mut out = vec![0.0; state.alpha.len()];
    first_order_field(kappa, &state.omega, &state.alpha, &mut out);
    match out.iter().position(|r| !r.is_finite()) {
        Some(particle) => Err(Error::BlowUp { t: state.t, particle }),
        None => Ok(out),
    }
}

fn first_order_field(kappa: f64, omega: &[f64], alpha: &[f64], out: &mut [f64]) {
    let scale = kappa / alpha.len() as f64;
    sinh_sums(alpha, out);
    out.iter_mut().zip(omega).for_each(|(o, w)| *o = w + scale * *o);
}

/// `alpha_ddot_i = (kappa/N) sum_j psi(alpha_i, alpha_j) (alpha_dot_j - alpha_dot_i)`.
pub fn hk_rhs_second_order<F>(state: &HkSecondOrderState, kappa: f64, psi: F) -> Result<Vec<f64>>
where
    F: Fn(f64, f64) -> f64,
{
    if state.alpha.len() != state.alpha_dot.len() {
        return Err(Error::DimensionMismatch { expected: state.alpha.len(), found: state.alpha_dot.len() });
    }
    let mut out = vec![0.0; state.alpha.len()];
    second_order_field(kappa, &psi, &state.alpha, &state.alpha_dot, &mut out);
    match out.iter().position(|r| !r.is_finite()) {
        Some(particle) => Err(Error::BlowUp { t: state.t, particle }),
        None => Ok(out),
    }
}

fn second_order_field<F: Fn(f64, f64) -> f64>(kappa: f64, psi: &F, alpha: &[f64], rate: &[f64], out: &mut [f64]) {
    let scale = kappa / alpha.len() as f64;
    for (i, o) in out.iter_mut().enumerate() {
        *o = scale * (0..alpha.len()).map(|j| psi(alpha[i], alpha[j]) * (rate[j] - rate[i])).sum::<f64>();
    }
}

/// The weight `cosh(alpha_i - alpha_j)` under which the second-order system
/// integrates to the first-order one.
pub fn cosh_psi(a: f64, b: f64) -> f64 {
    libm::cosh(a - b)
}

/// `alpha_dot_i - (kappa/N) sum_j sinh(alpha_j - alpha_i)`, conserved by the
/// second-order flow with [`cosh_psi`].
pub fn hk_first_integral(state: &HkSecondOrderState, kappa: f64) -> Vec<f64> {
    let scale = kappa / state.alpha.len() as f64;
    let mut s = vec![0.0; state.alpha.len()];
    sinh_sums(&state.alpha, &mut s);
    s.iter().zip(&state.alpha_dot).map(|(si, ad)| ad - scale * si).collect()
}

impl HkState {
    /// First-order state with the natural frequencies matched to `s`.
    pub fn from_second_order(s: &HkSecondOrderState, kappa: f64) -> Self {
        Self { t: s.t, alpha: s.alpha.clone(), omega: hk_first_integral(s, kappa) }
    }
}

/// RK4 for the first-order model over `steps` steps of `dt`; `observe` sees
/// every state including the initial one.
pub fn integrate_first_order<O>(state: &HkState, kappa: f64, dt: f64, steps: usize, mut observe: O) -> Result<HkState>
where
    O: FnMut(&HkState),
{
    let mut s = state.clone();
    let mut rk = Rk4::new(s.alpha.len());
    observe(&s);
    for k in 1..=steps {
        let omega = &s.omega;
        rk.step(s.t, dt, &mut s.alpha, |_, a, da| first_order_field(kappa, omega, a, da));
        s.t = state.t + k as f64 * dt;
        if let Some(particle) = s.alpha.iter().position(|a| !a.is_finite()) {
            return Err(Error::BlowUp { t: s.t, particle });
        }
        observe(&s);
    }
    Ok(s)
}

/// RK4 for the second-order model on `(alpha, alpha_dot)`.
pub fn integrate_second_order<F, O>(
    state: &HkSecondOrderState,
    kappa: f64,
    psi: F,
    dt: f64,
    steps: usize,
    mut observe: O,
) -> Result<HkSecondOrderState>
where
    F: Fn(f64, f64) -> f64,
    O: FnMut(&HkSecondOrderState),
{
    let n = state.alpha.len();
    let mut y: Vec<f64> = state.alpha.iter().chain(&state.alpha_dot).copied().collect();
    let mut rk = Rk4::new(2 * n);
    let mut s = state.clone();
    observe(&s);
    for k in 1..=steps {
        rk.step(s.t, dt, &mut y, |_, y, dy| {
            let (a, r) = y.split_at(n);
            let (da, dr) = dy.split_at_mut(n);
            da.copy_from_slice(r);
            second_order_field(kappa, &psi, a, r, dr);
        });
        s.t = state.t + k as f64 * dt;
        s.alpha.copy_from_slice(&y[..n]);
        s.alpha_dot.copy_from_slice(&y[n..]);
        if let Some(particle) = y.iter().position(|c| !c.is_finite()) {
            return Err(Error::BlowUp { t: s.t, particle: particle % n });
        }
        observe(&s);
    }
    Ok(s)
}

fn reduce_one(x: &[f64], v: &[f64], p: &[f64], q: &[f64]) -> (f64, f64, f64) {
    let alpha = libm::asinh(mdot(x, q));
    let (ch, sh) = (libm::cosh(alpha), libm::sinh(alpha));
    let rate = mdot(v, &p.iter().zip(q).map(|(pk, qk)| pk * sh + qk * ch).collect::<Vec<_>>());
    let mut res: f64 = 0.0;
    for k in 0..x.len() {
        res = res.max(libm::fabs(x[k] - (p[k] * ch + q[k] * sh)));
        res = res.max(libm::fabs(v[k] - rate * (p[k] * sh + q[k] * ch)) / libm::fabs(rate).max(1.0));
    }
    (alpha, rate, res / ch)
}

/// Max over particles of the distance of `(x_i, v_i)` from the geodesic and
/// its tangent line, relative to the size `cosh(alpha_i)` of the embedding.
pub fn geodesic_residual(state: &FlockState, geo: &Geodesic) -> f64 {
    reduce_with_residual(state, geo).1
}

/// Reduced coordinates together with the [`geodesic_residual`], without
/// rejecting off-geodesic states.
pub fn reduce_with_residual(state: &FlockState, geo: &Geodesic) -> (HkSecondOrderState, f64) {
    let (p, q) = (geo.start().as_slice(), geo.direction().as_slice());
    let mut out = HkSecondOrderState { t: state.t(), alpha: Vec::new(), alpha_dot: Vec::new() };
    let mut worst: f64 = 0.0;
    for i in 0..state.n() {
        let (a, r, res) = reduce_one(state.position(i), state.velocity(i), p, q);
        worst = worst.max(res);
        out.alpha.push(a);
        out.alpha_dot.push(r);
    }
    (out, worst)
}

/// Angles `alpha_i = asinh(<x_i, q>)` and rates
/// `alpha_dot_i = <v_i, p sinh(alpha_i) + q cosh(alpha_i)>` of a flock on the
/// unit-speed geodesic `cosh(s) p + sinh(s) q`.
pub fn reduce_to_geodesic(state: &FlockState, geo: &Geodesic) -> Result<HkSecondOrderState> {
    if geo.start().dim() != state.dim() {
        return Err(Error::DimensionMismatch { expected: state.dim() + 1, found: geo.start().dim() + 1 });
    }
    if geo.direction().norm_sq() == 0.0 {
        return Err(Error::NonUnitDirection { norm: 0.0 });
    }
    let (out, worst) = reduce_with_residual(state, geo);
    if !(worst <= REDUCTION_TOL) {
        return Err(Error::ReductionNotApplicable { residual: worst });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::init::geodesic_state;
    use crate::minkowski::{HPoint, HTangent, MVec};

    fn axis_geodesic() -> Geodesic {
        let p = HPoint::apex(2);
        let q = HTangent::new(p.clone(), MVec::new(vec![0.0, 1.0, 0.0]).unwrap()).unwrap();
        Geodesic::new(p, q).unwrap()
    }

    #[test]
    fn first_order_examples() {
        let s = HkState { t: 0.0, alpha: vec![0.0, libm::log(2.0)], omega: vec![0.0; 2] };
        let r = hk_rhs_first_order(&s, 1.0).unwrap();
        assert!((r[0] - 0.375).abs() < 1e-15 && (r[1] + 0.375).abs() < 1e-15);
        let eq = HkState { t: 0.0, alpha: vec![0.3; 4], omega: vec![0.0; 4] };
        assert!(hk_rhs_first_order(&eq, 2.0).unwrap().iter().all(|r| *r == 0.0));
        let w = HkState { t: 0.0, alpha: vec![0.1, -0.7, 1.2], omega: vec![0.5, -0.2, 0.9] };
        let total: f64 = hk_rhs_first_order(&w, 1.3).unwrap().iter().sum();
        assert!((total - 1.2).abs() < 1e-14);
        let big = HkState { t: 0.0, alpha: vec![0.0, 800.0], omega: vec![0.0; 2] };
        assert!(matches!(hk_rhs_first_order(&big, 1.0), Err(Error::BlowUp { .. })));
    }

    #[test]
    fn second_order_examples() {
        let s = HkSecondOrderState { t: 0.0, alpha: vec![0.2, -0.4], alpha_dot: vec![0.7, 0.7] };
        assert!(hk_rhs_second_order(&s, 1.0, cosh_psi).unwrap().iter().all(|r| *r == 0.0));
        let s = HkSecondOrderState { t: 0.0, alpha: vec![0.5, -0.5], alpha_dot: vec![1.0, -1.0] };
        let r = hk_rhs_second_order(&s, 1.0, cosh_psi).unwrap();
        assert_eq!(r[0], -r[1]);
    }

    #[test]
    fn first_integral_is_conserved() {
        let s = HkSecondOrderState { t: 0.0, alpha: vec![0.3, -0.6, 0.1, 0.8], alpha_dot: vec![0.4, -1.0, 0.2, 0.5] };
        let c0 = hk_first_integral(&s, 1.0);
        let mut worst: f64 = 0.0;
        integrate_second_order(&s, 1.0, cosh_psi, 1e-4, 100_000, |st| {
            for (a, b) in hk_first_integral(st, 1.0).iter().zip(&c0) {
                worst = worst.max((a - b).abs());
            }
        })
        .unwrap();
        assert!(worst < 1e-6, "{worst}");
    }

    #[test]
    fn reduction_round_trip() {
        let g = axis_geodesic();
        let alpha = vec![0.0, 0.4, -1.1];
        let rate = vec![0.3, -0.2, 1.5];
        let s = geodesic_state(&g, &alpha, &rate).unwrap();
        let r = reduce_to_geodesic(&s, &g).unwrap();
        for i in 0..3 {
            assert!((r.alpha[i] - alpha[i]).abs() < 1e-12);
            assert!((r.alpha_dot[i] - rate[i]).abs() < 1e-12);
        }
        assert_eq!(r.alpha[0], 0.0);
        let off = FlockState::new(0.0, &[vec![libm::cosh(0.5), 0.0, libm::sinh(0.5)]], &[vec![0.0; 3]]).unwrap();
        assert!(matches!(reduce_to_geodesic(&off, &g), Err(Error::ReductionNotApplicable { .. })));
    }
}
