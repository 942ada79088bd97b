use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::minkowski::{mdot, HPoint, HTangent, MVec, DEFAULT_CONSTRAINT_TOL};

/// Positions and velocities of `N` particles on `H^d` at time `t`.
///
/// Storage is flat: particle `i` occupies `[i*(d+1), (i+1)*(d+1))` in both
/// the position and the velocity buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct FlockState {
    pub(crate) t: f64,
    pub(crate) dim: usize,
    pub(crate) x: Vec<f64>,
    pub(crate) v: Vec<f64>,
}

impl FlockState {
    /// Builds a state from per-particle embedded vectors, validated against
    /// the default constraint tolerance.
    pub fn new(t: f64, x: &[Vec<f64>], v: &[Vec<f64>]) -> Result<Self> {
        Self::with_tolerance(t, x, v, DEFAULT_CONSTRAINT_TOL)
    }

    pub fn with_tolerance(t: f64, x: &[Vec<f64>], v: &[Vec<f64>], tol: f64) -> Result<Self> {
        let n = x.len();
        if n == 0 {
            return Err(Error::InvalidConfig { key: "x", reason: "at least one particle is required".into() });
        }
        if v.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: v.len() });
        }
        let width = x[0].len();
        if width < 2 {
            return Err(Error::TooFewComponents { found: width });
        }
        let mut flat_x = Vec::with_capacity(n * width);
        let mut flat_v = Vec::with_capacity(n * width);
        for (xi, vi) in x.iter().zip(v) {
            if xi.len() != width || vi.len() != width {
                return Err(Error::DimensionMismatch { expected: width, found: xi.len().max(vi.len()) });
            }
            flat_x.extend_from_slice(xi);
            flat_v.extend_from_slice(vi);
        }
        Self::from_flat(t, width - 1, flat_x, flat_v, tol)
    }

    pub fn from_points(t: f64, x: &[HPoint], v: &[HTangent]) -> Result<Self> {
        let xs: Vec<Vec<f64>> = x.iter().map(|p| p.as_slice().to_vec()).collect();
        let vs: Vec<Vec<f64>> = v.iter().map(|w| w.as_slice().to_vec()).collect();
        Self::new(t, &xs, &vs)
    }

    /// Validates flat buffers of length `N * (dim + 1)`.
    pub fn from_flat(t: f64, dim: usize, x: Vec<f64>, v: Vec<f64>, tol: f64) -> Result<Self> {
        let width = dim + 1;
        if dim == 0 {
            return Err(Error::TooFewComponents { found: 1 });
        }
        if x.len() != v.len() || !x.len().is_multiple_of(width) || x.is_empty() {
            return Err(Error::DimensionMismatch { expected: x.len(), found: v.len() });
        }
        if x.iter().chain(&v).any(|c| !c.is_finite()) || !t.is_finite() {
            return Err(Error::NonFinite);
        }
        let state = Self { t, dim, x, v };
        for i in 0..state.n() {
            let xi = state.position(i);
            if xi[0] <= 0.0 {
                return Err(Error::LowerSheet { x0: xi[0] });
            }
            let r = libm::fabs(mdot(xi, xi) + 1.0);
            if r > tol {
                return Err(Error::NotOnHyperboloid { residual: r, tolerance: tol });
            }
            let r = libm::fabs(mdot(xi, state.velocity(i)));
            if r > tol {
                return Err(Error::NotTangent { residual: r, tolerance: tol });
            }
        }
        Ok(state)
    }

    #[cfg(test)]
    pub(crate) fn from_flat_unchecked(t: f64, dim: usize, x: Vec<f64>, v: Vec<f64>) -> Self {
        Self { t, dim, x, v }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn set_t(&mut self, t: f64) {
        self.t = t;
    }

    /// Number of particles.
    pub fn n(&self) -> usize {
        self.x.len() / (self.dim + 1)
    }

    /// Ambient hyperbolic dimension `d`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn position(&self, i: usize) -> &[f64] {
        let w = self.dim + 1;
        &self.x[i * w..(i + 1) * w]
    }

    pub fn velocity(&self, i: usize) -> &[f64] {
        let w = self.dim + 1;
        &self.v[i * w..(i + 1) * w]
    }

    pub fn positions(&self) -> &[f64] {
        &self.x
    }

    pub fn velocities(&self) -> &[f64] {
        &self.v
    }

    pub fn point(&self, i: usize) -> HPoint {
        HPoint::from_embed_unchecked(MVec::from_vec_unchecked(self.position(i).to_vec()))
    }

    pub fn tangent(&self, i: usize) -> HTangent {
        HTangent::from_parts_unchecked(self.point(i), MVec::from_vec_unchecked(self.velocity(i).to_vec()))
    }

    /// Per-particle positions as nested vectors.
    pub fn positions_nested(&self) -> Vec<Vec<f64>> {
        (0..self.n()).map(|i| self.position(i).to_vec()).collect()
    }

    pub fn velocities_nested(&self) -> Vec<Vec<f64>> {
        (0..self.n()).map(|i| self.velocity(i).to_vec()).collect()
    }

    /// `max_i max(|<x_i,x_i>_M + 1|, |<x_i,v_i>_M|)`.
    pub fn constraint_drift(&self) -> f64 {
        (0..self.n())
            .map(|i| {
                let (x, v) = (self.position(i), self.velocity(i));
                libm::fabs(mdot(x, x) + 1.0).max(libm::fabs(mdot(x, v)))
            })
            .fold(0.0, f64::max)
    }

    /// Particle with the worst constraint residual, if it exceeds `tol`.
    pub fn check_constraints(&self, tol: f64) -> Result<()> {
        for i in 0..self.n() {
            let (x, v) = (self.position(i), self.velocity(i));
            let r = libm::fabs(mdot(x, x) + 1.0).max(libm::fabs(mdot(x, v)));
            if !(r <= tol) {
                return Err(Error::StateCorruption { particle: i, residual: r });
            }
        }
        Ok(())
    }

    /// Largest timelike coordinate `x^0` over the flock.
    pub fn max_x0(&self) -> f64 {
        (0..self.n()).map(|i| self.position(i)[0]).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn validates_constraints() {
        let ok = FlockState::new(0.0, &[vec![1.0, 0.0, 0.0]], &[vec![0.0, 1.0, 0.0]]).unwrap();
        assert_eq!(ok.n(), 1);
        assert_eq!(ok.dim(), 2);
        assert!(matches!(
            FlockState::new(0.0, &[vec![1.0, 0.5, 0.0]], &[vec![0.0, 1.0, 0.0]]),
            Err(Error::NotOnHyperboloid { .. })
        ));
        assert!(matches!(
            FlockState::new(0.0, &[vec![1.0, 0.0, 0.0]], &[vec![1.0, 1.0, 0.0]]),
            Err(Error::NotTangent { .. })
        ));
        assert!(FlockState::new(0.0, &[vec![1.0, 0.0, 0.0]], &[]).is_err());
        assert!(FlockState::new(0.0, &[vec![1.0, 0.0, 0.0]], &[vec![0.0, 1.0]]).is_err());
        assert!(matches!(FlockState::new(0.0, &[vec![1.0, 0.0]], &[vec![0.0, f64::NAN]]), Err(Error::NonFinite)));
    }

    #[test]
    fn drift_and_accessors() {
        let s = FlockState::from_flat_unchecked(0.0, 1, vec![1.0, 0.0, 1.0, 1e-3], vec![0.0, 1.0, 0.0, 0.0]);
        assert_eq!(s.n(), 2);
        assert_eq!(s.position(1), &[1.0, 1e-3]);
        assert!((s.constraint_drift() - 1e-6).abs() < 1e-15);
        assert!(matches!(s.check_constraints(1e-8), Err(Error::StateCorruption { particle: 1, .. })));
    }
}
