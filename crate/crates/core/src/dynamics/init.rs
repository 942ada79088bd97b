use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::SplitMix64;

use super::state::FlockState;
use crate::error::{Error, Result};
use crate::geometry::Geodesic;
use crate::minkowski::{mdot, project_tangent_in_place, HPoint, HTangent, MVec};

/// Identifier of the seeded generator, recorded in run manifests.
pub const RNG_ALGORITHM: &str = "splitmix64";

#[cfg(feature = "serde")]
fn default_radius() -> f64 {
    1.0
}

/// How the initial flock is built.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields))]
pub enum Initializer {
    /// Chart coordinates uniform in a Euclidean ball, velocities with
    /// independent normal ambient components projected to the tangent space.
    RandomBall {
        #[cfg_attr(feature = "serde", serde(default = "default_radius"))]
        radius: f64,
        #[cfg_attr(feature = "serde", serde(default = "default_radius"))]
        velocity_scale: f64,
    },
    /// Particles at `cosh(alpha_i) p + sinh(alpha_i) q` on the geodesic through
    /// `p` (chart coordinates `base`, apex by default) with unit direction `q`
    /// (the tangent projection of `direction`, first axis by default), moving
    /// at rates `alpha_dot_i` along it.
    Geodesic {
        #[cfg_attr(feature = "serde", serde(default))]
        base: Option<Vec<f64>>,
        #[cfg_attr(feature = "serde", serde(default))]
        direction: Option<Vec<f64>>,
        alpha: Vec<f64>,
        alpha_dot: Vec<f64>,
    },
    /// A geodesic through the apex in a random direction with chart radius
    /// of every particle at most `radius` and normal rates scaled by
    /// `velocity_scale`.
    RandomGeodesic {
        #[cfg_attr(feature = "serde", serde(default = "default_radius"))]
        radius: f64,
        #[cfg_attr(feature = "serde", serde(default = "default_radius"))]
        velocity_scale: f64,
    },
    /// Embedded coordinates given verbatim.
    Explicit { x: Vec<Vec<f64>>, v: Vec<Vec<f64>> },
}

impl Default for Initializer {
    fn default() -> Self {
        Initializer::RandomBall { radius: 1.0, velocity_scale: 1.0 }
    }
}

impl Initializer {
    /// Builds the initial state of `n` particles on `H^dim`.
    pub fn build(&self, n: usize, dim: usize, seed: u64, tol: f64) -> Result<FlockState> {
        let mut rng = SplitMix64::seed_from_u64(seed);
        match self {
            Initializer::RandomBall { radius, velocity_scale } => {
                let x: Vec<Vec<f64>> = (0..n).map(|_| ball_point(&mut rng, dim, *radius)).collect();
                let v: Vec<Vec<f64>> = x
                    .iter()
                    .map(|xi| {
                        let mut w: Vec<f64> =
                            (0..=dim).map(|_| velocity_scale * rng.sample::<f64, _>(StandardNormal)).collect();
                        project_tangent_in_place(xi, &mut w);
                        w
                    })
                    .collect();
                FlockState::with_tolerance(0.0, &x, &v, tol)
            }
            Initializer::Geodesic { base, direction, alpha, alpha_dot } => {
                if alpha.len() != n || alpha_dot.len() != n {
                    return Err(Error::InvalidConfig {
                        key: "initializer.alpha",
                        reason: alloc::format!("alpha and alpha_dot must both have n = {n} entries"),
                    });
                }
                let p = match base {
                    Some(u) if u.len() == dim => HPoint::from_chart(u)?,
                    Some(u) => return Err(Error::DimensionMismatch { expected: dim, found: u.len() }),
                    None => HPoint::apex(dim),
                };
                let mut raw = vec![0.0; dim + 1];
                match direction {
                    Some(d) if d.len() == dim + 1 => raw.copy_from_slice(d),
                    Some(d) if d.len() == dim => raw[1..].copy_from_slice(d),
                    Some(d) => return Err(Error::DimensionMismatch { expected: dim + 1, found: d.len() }),
                    None => raw[1] = 1.0,
                }
                let g = unit_geodesic(p, raw)?;
                geodesic_state(&g, alpha, alpha_dot)
            }
            Initializer::RandomGeodesic { radius, velocity_scale } => {
                let mut raw = vec![0.0; dim + 1];
                loop {
                    raw[1..].iter_mut().for_each(|c| *c = rng.sample(StandardNormal));
                    if raw[1..].iter().any(|c| *c != 0.0) {
                        break;
                    }
                }
                let g = unit_geodesic(HPoint::apex(dim), raw)?;
                let amax = libm::asinh(*radius);
                let alpha: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0) * amax).collect();
                let alpha_dot: Vec<f64> =
                    (0..n).map(|_| velocity_scale * rng.sample::<f64, _>(StandardNormal)).collect();
                geodesic_state(&g, &alpha, &alpha_dot)
            }
            Initializer::Explicit { x, v } => {
                if x.len() != n {
                    return Err(Error::InvalidConfig {
                        key: "initializer.x",
                        reason: alloc::format!("expected n = {n} positions, found {}", x.len()),
                    });
                }
                if x.iter().any(|xi| xi.len() != dim + 1) {
                    return Err(Error::InvalidConfig {
                        key: "initializer.x",
                        reason: alloc::format!("every position needs d + 1 = {} components", dim + 1),
                    });
                }
                FlockState::with_tolerance(0.0, x, v, tol)
            }
        }
    }
}

fn ball_point(rng: &mut SplitMix64, dim: usize, radius: f64) -> Vec<f64> {
    let mut dir: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
    let norm = libm::sqrt(dir.iter().map(|c| c * c).sum::<f64>());
    let r = radius * libm::pow(rng.random::<f64>(), 1.0 / dim as f64);
    if norm > 0.0 {
        dir.iter_mut().for_each(|c| *c *= r / norm);
    }
    HPoint::from_chart(&dir).map(|p| p.as_slice().to_vec()).unwrap_or_else(|_| {
        let mut apex = vec![0.0; dim + 1];
        apex[0] = 1.0;
        apex
    })
}

fn unit_geodesic(p: HPoint, mut raw: Vec<f64>) -> Result<Geodesic> {
    project_tangent_in_place(p.as_slice(), &mut raw);
    let norm = libm::sqrt(mdot(&raw, &raw).max(0.0));
    if !(norm > 0.0) {
        return Err(Error::InvalidConfig {
            key: "initializer.direction",
            reason: "direction has no tangent component".into(),
        });
    }
    raw.iter_mut().for_each(|c| *c /= norm);
    let dir = HTangent::new(p.clone(), MVec::new(raw)?)?;
    Geodesic::new(p, dir)
}

/// Places particles at arclengths `alpha` on `g` with speeds `alpha_dot` along it.
pub fn geodesic_state(g: &Geodesic, alpha: &[f64], alpha_dot: &[f64]) -> Result<FlockState> {
    if alpha.len() != alpha_dot.len() {
        return Err(Error::DimensionMismatch { expected: alpha.len(), found: alpha_dot.len() });
    }
    let mut x = Vec::with_capacity(alpha.len());
    let mut v = Vec::with_capacity(alpha.len());
    for (&a, &ad) in alpha.iter().zip(alpha_dot) {
        if !a.is_finite() || !ad.is_finite() {
            return Err(Error::NonFinite);
        }
        let (p, w) = g.eval(a);
        x.push(p.as_slice().to_vec());
        v.push(w.as_slice().iter().map(|c| c * ad).collect());
    }
    FlockState::new(0.0, &x, &v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minkowski::DEFAULT_CONSTRAINT_TOL as TOL;

    #[test]
    fn random_ball_is_seeded_and_inside() {
        let init = Initializer::RandomBall { radius: 1.5, velocity_scale: 1.0 };
        let a = init.build(50, 2, 7, TOL).unwrap();
        assert_eq!(a, init.build(50, 2, 7, TOL).unwrap());
        assert_ne!(a, init.build(50, 2, 8, TOL).unwrap());
        for i in 0..50 {
            let u = &a.position(i)[1..];
            assert!(libm::sqrt(u[0] * u[0] + u[1] * u[1]) <= 1.5);
        }
        assert!(a.constraint_drift() < 1e-14);
    }

    #[test]
    fn random_geodesic_respects_radius() {
        let init = Initializer::RandomGeodesic { radius: 1.0, velocity_scale: 1.0 };
        let s = init.build(5, 2, 3, TOL).unwrap();
        for i in 0..5 {
            let u = &s.position(i)[1..];
            assert!(libm::sqrt(u[0] * u[0] + u[1] * u[1]) <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn geodesic_and_explicit_validation() {
        let init =
            Initializer::Geodesic { base: None, direction: None, alpha: vec![0.0, 1.0], alpha_dot: vec![1.0, 0.0] };
        let s = init.build(2, 2, 0, TOL).unwrap();
        assert_eq!(s.position(0), &[1.0, 0.0, 0.0]);
        assert_eq!(s.velocity(0), &[0.0, 1.0, 0.0]);
        assert!((s.position(1)[1] - libm::sinh(1.0)).abs() < 1e-15);
        assert!(init.build(3, 2, 0, TOL).is_err());
        let bad = Initializer::Geodesic {
            base: None,
            direction: Some(vec![1.0, 0.0, 0.0]),
            alpha: vec![0.0],
            alpha_dot: vec![0.0],
        };
        assert!(bad.build(1, 2, 0, TOL).is_err());
        let ex = Initializer::Explicit { x: vec![vec![1.0, 0.0]], v: vec![vec![0.0, 2.0]] };
        assert!(ex.build(1, 1, 0, TOL).is_ok());
        assert!(ex.build(1, 2, 0, TOL).is_err());
    }
}
