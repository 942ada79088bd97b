//! Closed-form geodesics, distance, log map, parallel transport and
//! covariant acceleration on the hyperboloid.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::minkowski::{
    mdot, mdot_compensated, project_point_in_place, project_tangent_in_place, tangent_norm, HPoint, HTangent, MVec,
    DEFAULT_CONSTRAINT_TOL,
};

pub mod oracle;

/// An arclength-parametrized geodesic `s -> cosh(s) start + sinh(s) direction`.
#[derive(Debug, Clone, PartialEq)]
pub struct Geodesic {
    start: HPoint,
    direction: HTangent,
}

impl Geodesic {
    /// `direction` must be tangent at `start` with unit or zero norm.
    pub fn new(start: HPoint, direction: HTangent) -> Result<Self> {
        if direction.base() != &start {
            // Re-validate tangency against the given start.
            HTangent::new(start.clone(), direction.vec().clone())?;
        }
        let norm = tangent_norm(&direction)?;
        if norm != 0.0 && libm::fabs(norm - 1.0) > DEFAULT_CONSTRAINT_TOL {
            return Err(Error::NonUnitDirection { norm });
        }
        let direction = HTangent::from_parts_unchecked(start.clone(), direction.vec().clone());
        Ok(Self { start, direction })
    }

    /// Unit-speed geodesic through `p` heading toward `q`. `p == q` gives a stationary curve.
    pub fn through(p: &HPoint, q: &HPoint) -> Result<Self> {
        let log = log_map(p, q)?;
        let s = tangent_norm(&log)?;
        let dir = if s > 0.0 { log.scaled(1.0 / s) } else { log };
        Ok(Self { start: p.clone(), direction: dir })
    }

    pub fn start(&self) -> &HPoint {
        &self.start
    }

    pub fn direction(&self) -> &HTangent {
        &self.direction
    }

    /// Position and velocity at arclength `s`.
    ///
    /// The cosh/sinh combination amplifies any constraint residual of the
    /// start data by `cosh^2 s`, so the result is renormalized onto the
    /// hyperboloid and its tangent space.
    pub fn eval(&self, s: f64) -> (HPoint, HTangent) {
        let (ch, sh) = (libm::cosh(s), libm::sinh(s));
        let p = self.start.as_slice();
        let d = self.direction.as_slice();
        let mut pos: Vec<f64> = p.iter().zip(d).map(|(a, b)| ch * a + sh * b).collect();
        let mut vel: Vec<f64> = p.iter().zip(d).map(|(a, b)| sh * a + ch * b).collect();
        // pos is timelike with pos^0 >= 1 whenever finite
        if project_point_in_place(&mut pos).is_ok() && self.direction.norm_sq() != 0.0 {
            project_tangent_in_place(&pos, &mut vel);
        }
        let point = HPoint::from_embed_unchecked(MVec::from_vec_unchecked(pos));
        let tangent = HTangent::from_parts_unchecked(point.clone(), MVec::from_vec_unchecked(vel));
        (point, tangent)
    }
}

/// Free-function form of [`Geodesic::eval`].
pub fn geodesic_eval(g: &Geodesic, s: f64) -> (HPoint, HTangent) {
    g.eval(s)
}

/// Geodesic distance from raw embedded points.
///
/// Uses `arccosh(-<p,q>_M)` (clamped at 1) for well-separated points and the
/// chord identity `<q-p,q-p>_M = 4 sinh^2(d/2)` below `cosh d = 2`, where
/// `arccosh` loses about half the significant digits.
pub fn distance_raw(p: &[f64], q: &[f64]) -> f64 {
    let c = -mdot(p, q);
    if c >= 2.0 {
        return libm::acosh(c);
    }
    let mut chord = 0.0;
    chord -= (q[0] - p[0]) * (q[0] - p[0]);
    for k in 1..p.len() {
        chord += (q[k] - p[k]) * (q[k] - p[k]);
    }
    2.0 * libm::asinh(0.5 * libm::sqrt(chord.max(0.0)))
}

/// `d(p,q)` with `cosh d(p,q) = -<p,q>_M`.
pub fn geodesic_distance(p: &HPoint, q: &HPoint) -> f64 {
    distance_raw(p.as_slice(), q.as_slice())
}

/// Initial velocity of the geodesic from `p` reaching `q` at unit time.
///
/// Its norm equals `d(p,q)`; `p == q` gives the zero tangent.
pub fn log_map(p: &HPoint, q: &HPoint) -> Result<HTangent> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim() + 1, found: q.dim() + 1 });
    }
    let s = geodesic_distance(p, q);
    if s == 0.0 {
        return Ok(HTangent::zero(p.clone()));
    }
    let ps = p.as_slice();
    let qs = q.as_slice();
    // q - cosh(s) p with cosh(s) = -<p,q>_M, i.e. the tangential part of q.
    let c = mdot(ps, qs);
    let factor = s / libm::sinh(s);
    let vec: Vec<f64> = ps.iter().zip(qs).map(|(a, b)| factor * (b + c * a)).collect();
    Ok(HTangent::from_parts_unchecked(p.clone(), MVec::from_vec_unchecked(vec)))
}

/// Raw-slice parallel transport of `v` from `p` to `q`, written into `out`.
///
/// On the tangent space at `p`, `v + <v,q>/(1 - <p,q>) (p + q)` coincides with
/// the Minkowski reflection `v - 2 <v,n>/<n,n> n`, `n = p + q`. The reflection
/// form is evaluated because it is an exact isometry for any floating-point
/// `p` and `q`, whereas the first form inherits their constraint residuals,
/// which grow like `cosh^2 d(p,q)`.
#[inline]
pub fn transport_raw(p: &[f64], q: &[f64], v: &[f64], out: &mut [f64]) {
    let w = v.len();
    let mut n = [0.0; 8];
    if w <= n.len() {
        reflect(p, q, v, &mut n[..w], out);
    } else {
        reflect(p, q, v, &mut alloc::vec![0.0; w], out);
    }
}

#[inline]
fn reflect(p: &[f64], q: &[f64], v: &[f64], n: &mut [f64], out: &mut [f64]) {
    n.iter_mut().zip(p.iter().zip(q)).for_each(|(nk, (a, b))| *nk = a + b);
    let coef = -2.0 * mdot_compensated(v, n) / mdot_compensated(n, n);
    for k in 0..v.len() {
        out[k] = libm::fma(coef, n[k], v[k]);
    }
}

/// Parallel transport of `v` (tangent at `p`) along the geodesic to `q`.
pub fn parallel_transport(p: &HPoint, q: &HPoint, v: &HTangent) -> Result<HTangent> {
    if p.dim() != q.dim() || v.vec().dim() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim() + 1, found: q.dim() + 1 });
    }
    let mut out = alloc::vec![0.0; p.dim() + 1];
    transport_raw(p.as_slice(), q.as_slice(), v.as_slice(), &mut out);
    Ok(HTangent::from_parts_unchecked(q.clone(), MVec::from_vec_unchecked(out)))
}

/// Covariant acceleration `xdd - <v,v>_M x` of a curve with velocity `v`
/// and ambient acceleration `xdd` at `x`.
pub fn covariant_accel(x: &HPoint, v: &HTangent, xdd: &MVec) -> Result<MVec> {
    if xdd.dim() != x.dim() {
        return Err(Error::DimensionMismatch { expected: x.dim() + 1, found: xdd.dim() + 1 });
    }
    Ok(xdd.axpy(-v.norm_sq(), x.embed()))
}
