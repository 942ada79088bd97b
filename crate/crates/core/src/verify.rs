//! Randomized identity and oracle-equivalence suites.
//!
//! Each suite draws `samples` seeded random cases and reports, per check,
//! the worst residual against a fixed tolerance.

use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::SplitMix64;

use crate::diagnostics::{lemma41_check, lemma43_check, misalignment, misalignment_transport};
use crate::dynamics::hk::{
    cosh_psi, hk_first_integral, integrate_first_order, integrate_second_order, reduce_with_residual, HkState,
};
use crate::dynamics::{geodesic_state, CommWeight, FlockState, HcsIntegrator};
use crate::error::{Error, Result};
use crate::geometry::oracle::{chart_geodesic_oracle, transport_ode_oracle, DEFAULT_ORACLE_STEP};
use crate::geometry::{parallel_transport, Geodesic};
use crate::hyp_trig::HTriangle;
use crate::minkowski::{mdot, project_tangent_in_place, tangent_norm, HPoint, HTangent, MVec};

/// Named verification suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    GeodesicOracle,
    TransportOracle,
    TrigIdentities,
    Holonomy,
    Inequalities,
    HkReduction,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::GeodesicOracle,
        Suite::TransportOracle,
        Suite::TrigIdentities,
        Suite::Holonomy,
        Suite::Inequalities,
        Suite::HkReduction,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::GeodesicOracle => "geodesic-oracle",
            Suite::TransportOracle => "transport-oracle",
            Suite::TrigIdentities => "trig-identities",
            Suite::Holonomy => "holonomy",
            Suite::Inequalities => "inequalities",
            Suite::HkReduction => "hk-reduction",
        }
    }

    pub fn from_name(name: &str) -> Option<Suite> {
        Suite::ALL.into_iter().find(|s| s.name() == name)
    }

    /// Sample count used when none is given.
    pub fn default_samples(self) -> usize {
        match self {
            Suite::HkReduction => 3,
            _ => 1000,
        }
    }
}

/// Worst residual of one check; it passes when `max_residual <= tolerance`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Check {
    pub name: &'static str,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self { name, max_residual: f64::NEG_INFINITY, tolerance, pass: true }
    }

    fn observe(&mut self, residual: f64) {
        if residual.is_nan() {
            self.max_residual = f64::NAN;
        } else if residual > self.max_residual {
            self.max_residual = residual;
        }
        // NaN compares false and so fails
        self.pass = self.pass && residual <= self.tolerance;
    }
}

/// Outcome of a suite run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SuiteReport {
    pub suite: &'static str,
    pub samples: usize,
    pub seed: u64,
    pub checks: Vec<Check>,
    /// Cases dropped as degenerate (near-collinear triangles).
    pub skipped: usize,
    pub notes: Vec<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Runs `suite` on `samples` random cases drawn from `seed`.
pub fn run_suite(suite: Suite, samples: usize, seed: u64) -> Result<SuiteReport> {
    let mut rng = SplitMix64::seed_from_u64(seed);
    let mut report =
        SuiteReport { suite: suite.name(), samples, seed, checks: Vec::new(), skipped: 0, notes: Vec::new() };
    match suite {
        Suite::GeodesicOracle => geodesic_oracle(&mut rng, samples, &mut report)?,
        Suite::TransportOracle => transport_oracle(&mut rng, samples, &mut report)?,
        Suite::TrigIdentities => trig_identities(&mut rng, samples, &mut report)?,
        Suite::Holonomy => holonomy(&mut rng, samples, &mut report)?,
        Suite::Inequalities => inequalities(&mut rng, samples, &mut report)?,
        Suite::HkReduction => hk_reduction(&mut rng, samples, &mut report)?,
    }
    Ok(report)
}

/// Random inputs shared by the suites and the test harnesses.
pub mod sample {
    use super::*;

    /// Chart coordinates uniform in the Euclidean ball of `radius`.
    pub fn point_in_ball<R: Rng>(rng: &mut R, dim: usize, radius: f64) -> HPoint {
        let mut u: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = libm::sqrt(u.iter().map(|c| c * c).sum::<f64>());
        let r = radius * libm::pow(rng.random::<f64>(), 1.0 / dim as f64);
        if norm > 0.0 {
            u.iter_mut().for_each(|c| *c *= r / norm);
        } else {
            u.iter_mut().for_each(|c| *c = 0.0);
        }
        HPoint::from_chart(&u).unwrap_or_else(|_| HPoint::apex(dim))
    }

    /// Normal ambient components scaled by `scale`, projected to the tangent space at `p`.
    pub fn tangent<R: Rng>(rng: &mut R, p: &HPoint, scale: f64) -> HTangent {
        let mut w: Vec<f64> = (0..=p.dim()).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect();
        project_tangent_in_place(p.as_slice(), &mut w);
        HTangent::from_parts_unchecked(p.clone(), MVec::from_vec_unchecked(w))
    }

    /// A unit tangent at `p` in a uniformly random direction.
    pub fn unit_tangent<R: Rng>(rng: &mut R, p: &HPoint) -> HTangent {
        loop {
            let t = tangent(rng, p, 1.0);
            let n = libm::sqrt(t.norm_sq());
            if n > 1e-6 {
                return t.scaled(1.0 / n);
            }
        }
    }

    /// `n` particles in the chart ball with normal tangent velocities.
    pub fn flock<R: Rng>(rng: &mut R, n: usize, dim: usize, radius: f64, scale: f64) -> FlockState {
        let pts: Vec<HPoint> = (0..n).map(|_| point_in_ball(rng, dim, radius)).collect();
        let vel: Vec<HTangent> = pts.iter().map(|p| tangent(rng, p, scale)).collect();
        FlockState::from_points(0.0, &pts, &vel).expect("sampled flock satisfies the constraints")
    }
}

fn geodesic_oracle(rng: &mut SplitMix64, samples: usize, report: &mut SuiteReport) -> Result<()> {
    let mut pos = Check::new("chart position vs oracle", 1e-6);
    let mut vel = Check::new("chart velocity vs oracle", 1e-6);
    let mut energy = Check::new("oracle speed drift", 1e-8);
    let mut on = Check::new("closed form on hyperboloid (relative)", 1e-12);
    for _ in 0..samples {
        let dim = rng.random_range(1..=3);
        let p = sample::point_in_ball(rng, dim, 1.0);
        let dir = sample::unit_tangent(rng, &p);
        let s = rng.random_range(-3.0..=3.0);
        let g = Geodesic::new(p.clone(), dir.clone())?;
        let (q, w) = g.eval(s);
        let end = chart_geodesic_oracle(p.chart(), &dir.as_slice()[1..], s, DEFAULT_ORACLE_STEP)?;
        pos.observe(max_diff(&end.position, q.chart()));
        vel.observe(max_diff(&end.velocity, &w.as_slice()[1..]));
        energy.observe(end.speed_sq_drift);
        on.observe(q.constraint_residual() / (q.as_slice()[0] * q.as_slice()[0]));
    }
    report.checks.extend([pos, vel, energy, on]);
    Ok(())
}

/// Transport cases start within this chart radius of the apex.
pub const TRANSPORT_BASE_RADIUS: f64 = 0.1;
pub const TRANSPORT_MAX_DISTANCE: f64 = 5.0;

fn transport_oracle(rng: &mut SplitMix64, samples: usize, report: &mut SuiteReport) -> Result<()> {
    let mut comp = Check::new("closed form vs transport ODE (components)", 1e-8);
    let mut iso = Check::new("closed-form norm preservation", 1e-12);
    let mut iso_ode = Check::new("oracle norm preservation", 1e-8);
    let mut tangent = Check::new("transported vector tangent at target (relative)", 1e-12);
    let mut inverse = Check::new("inverse transport round trip", 1e-10);
    for _ in 0..samples {
        let dim = rng.random_range(1..=3);
        let p = sample::point_in_ball(rng, dim, TRANSPORT_BASE_RADIUS);
        let dir = sample::unit_tangent(rng, &p);
        let dist = TRANSPORT_MAX_DISTANCE * rng.random::<f64>();
        let (q, _) = Geodesic::new(p.clone(), dir)?.eval(dist);
        let v = sample::unit_tangent(rng, &p);
        let closed = parallel_transport(&p, &q, &v)?;
        let ode = transport_ode_oracle(&p, &q, &v, DEFAULT_ORACLE_STEP)?;
        let n0 = tangent_norm(&v)?;
        comp.observe(max_diff(closed.as_slice(), ode.as_slice()));
        iso.observe(libm::fabs(tangent_norm(&closed)? - n0));
        iso_ode.observe(libm::fabs(tangent_norm(&ode)? - n0));
        let scale = q.as_slice()[0] * closed.as_slice().iter().fold(1.0f64, |m, c| m.max(libm::fabs(*c)));
        tangent.observe(libm::fabs(mdot(q.as_slice(), closed.as_slice())) / scale);
        let back = parallel_transport(&q, &p, &closed)?;
        inverse.observe(back.vec().max_abs_diff(v.vec()));
    }
    report.checks.extend([comp, iso, iso_ode, tangent, inverse]);
    Ok(())
}

fn triangle(rng: &mut SplitMix64) -> Result<HTriangle> {
    let pts: Vec<HPoint> = (0..3).map(|_| sample::point_in_ball(rng, 2, 2.0)).collect();
    HTriangle::new(pts[0].clone(), pts[1].clone(), pts[2].clone())
}

fn trig_identities(rng: &mut SplitMix64, samples: usize, report: &mut SuiteReport) -> Result<()> {
    let mut area = Check::new("L'Huilier vs angle-deficit area", 1e-9);
    let mut sines = Check::new("law of sines", 1e-9);
    let mut cosines = Check::new("law of cosines", 1e-9);
    for _ in 0..samples {
        let t = triangle(rng)?;
        let r = (|| -> Result<(f64, f64, f64)> {
            Ok((
                libm::fabs(t.area_lhuilier()? - t.area_angle_deficit()?),
                libm::fabs(t.law_of_sines_residual()?),
                libm::fabs(t.law_of_cosines_residual()?),
            ))
        })();
        match r {
            Ok((a, s, c)) => {
                area.observe(a);
                sines.observe(s);
                cosines.observe(c);
            }
            Err(Error::DegenerateTriangle { .. }) => report.skipped += 1,
            Err(e) => return Err(e),
        }
    }
    report.checks.extend([area, sines, cosines]);
    Ok(())
}

fn holonomy(rng: &mut SplitMix64, samples: usize, report: &mut SuiteReport) -> Result<()> {
    let mut defect = Check::new("holonomy defect vs |v| sqrt(2 - 2 cos Area)", 1e-8);
    for _ in 0..samples {
        let t = triangle(rng)?;
        let v = sample::tangent(rng, t.vertex(crate::hyp_trig::Vertex::A), 1.0);
        match (t.holonomy_defect(&v), t.holonomy_expected(&v)) {
            (Ok(a), Ok(b)) => defect.observe(libm::fabs(a - b)),
            (_, Err(Error::DegenerateTriangle { .. })) => report.skipped += 1,
            (Err(e), _) | (_, Err(e)) => return Err(e),
        }
    }
    report.checks.push(defect);
    Ok(())
}

fn inequalities(rng: &mut SplitMix64, samples: usize, report: &mut SuiteReport) -> Result<()> {
    let mut l41 = Check::new("transport coefficient bound (max excess)", 1e-10);
    let mut l43 = Check::new("triple-transport inequality (max violation)", 1e-10);
    let mut routes = Check::new("misalignment closed form vs explicit transport", 1e-12);
    let mut speeds = Check::new("speed gap bounded by misalignment", 1e-12);
    for _ in 0..samples {
        let n = rng.random_range(2..=6);
        let dim = rng.random_range(1..=3);
        let s = sample::flock(rng, n, dim, 1.5, 1.0);
        l41.observe(lemma41_check(&s));
        l43.observe(-lemma43_check(&s));
        let (i, j) = (rng.random_range(0..n), rng.random_range(0..n));
        let a = misalignment(&s, i, j)?;
        let b = misalignment_transport(&s, i, j)?;
        routes.observe(libm::fabs(a - b));
        let (vi, vj) = (s.velocity(i), s.velocity(j));
        let gap = libm::fabs(libm::sqrt(mdot(vi, vi)) - libm::sqrt(mdot(vj, vj)));
        speeds.observe(gap - b);
    }
    report.checks.extend([l41, l43, routes, speeds]);
    Ok(())
}

/// Flocking parameters of the reduction runs.
pub const HK_N: usize = 5;
pub const HK_DT: f64 = 1e-4;
pub const HK_T_END: f64 = 10.0;

fn hk_reduction(rng: &mut SplitMix64, samples: usize, report: &mut SuiteReport) -> Result<()> {
    let mut dev = Check::new("max |alpha_flock - alpha_kuramoto|", 1e-6);
    let mut off = Check::new("off-geodesic residual", 1e-8);
    let mut integral = Check::new("second-order first-integral drift", 1e-6);
    let kappa = 1.0;
    let steps = crate::ode::step_count(HK_T_END, HK_DT);
    for _ in 0..samples {
        let p = HPoint::apex(2);
        let g = Geodesic::new(p.clone(), sample::unit_tangent(rng, &p))?;
        let amax = libm::asinh(1.0);
        let alpha: Vec<f64> = (0..HK_N).map(|_| amax * rng.random_range(-1.0..=1.0)).collect();
        let rate: Vec<f64> = (0..HK_N).map(|_| rng.sample(StandardNormal)).collect();
        let mut flock = geodesic_state(&g, &alpha, &rate)?;

        let (second, res0) = reduce_with_residual(&flock, &g);
        off.observe(res0);
        let first = HkState::from_second_order(&second, kappa);
        let mut track = Vec::with_capacity((steps + 1) * HK_N);
        integrate_first_order(&first, kappa, HK_DT, steps, |s| track.extend_from_slice(&s.alpha))?;

        let c0 = hk_first_integral(&second, kappa);
        integrate_second_order(&second, kappa, cosh_psi, HK_DT, steps, |s| {
            let c = hk_first_integral(s, kappa);
            integral.observe(max_diff(&c, &c0));
        })?;

        let mut integ = HcsIntegrator::new(kappa, CommWeight::CoshDistance, true);
        for k in 1..=steps {
            integ.step_by(&mut flock, HK_DT)?;
            let (reduced, res) = reduce_with_residual(&flock, &g);
            off.observe(res);
            dev.observe(max_diff(&reduced.alpha, &track[k * HK_N..(k + 1) * HK_N]));
        }
    }
    report.checks.extend([dev, off, integral]);
    Ok(())
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| libm::fabs(x - y)).fold(0.0, |m, d| if d > m || d.is_nan() { d } else { m })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(Suite::from_name(s.name()), Some(s));
        }
        assert_eq!(Suite::from_name("nope"), None);
    }

    #[test]
    fn zero_samples_is_vacuous() {
        let r = run_suite(Suite::Holonomy, 0, 1).unwrap();
        assert!(r.passed());
        assert_eq!(r.checks[0].max_residual, f64::NEG_INFINITY);
    }

    #[test]
    fn nan_fails_a_check() {
        let mut c = Check::new("x", 1.0);
        c.observe(0.5);
        c.observe(f64::NAN);
        assert!(!c.pass);
        assert!(c.max_residual.is_nan());
    }

    #[test]
    fn quick_suites_pass() {
        for s in
            [Suite::GeodesicOracle, Suite::TransportOracle, Suite::TrigIdentities, Suite::Holonomy, Suite::Inequalities]
        {
            let r = run_suite(s, 20, 4).unwrap();
            assert!(r.passed(), "{r:?}");
        }
    }
}
