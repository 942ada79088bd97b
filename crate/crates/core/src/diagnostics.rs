//! Observables and inequality monitors evaluated on flock snapshots.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_xoshiro::SplitMix64;

use crate::dynamics::{coupling_terms, CommWeight, FlockState};
use crate::error::{Error, Result};
use crate::geometry::{distance_raw, transport_raw};
use crate::hyp_trig::det3;
use crate::minkowski::mdot;

/// Particle counts up to which the cubic triple-transport sum runs by default.
pub const LEMMA43_AUTO_MAX_N: usize = 64;

/// `E = 1/2 sum_i |v_i|^2`.
pub fn energy(state: &FlockState) -> f64 {
    0.5 * (0..state.n()).map(|i| mdot(state.velocity(i), state.velocity(i))).sum::<f64>()
}

fn check_index(state: &FlockState, idx: &[usize]) -> Result<()> {
    match idx.iter().find(|&&i| i >= state.n()) {
        Some(&index) => Err(Error::IndexOutOfRange { index, n: state.n() }),
        None => Ok(()),
    }
}

/// `g(P_ij v_j, v_i) = <v_i,v_j> + <v_i,x_j><v_j,x_i> / (1 - <x_i,x_j>)`.
pub fn transported_inner(state: &FlockState, i: usize, j: usize) -> f64 {
    let (xi, xj, vi, vj) = (state.position(i), state.position(j), state.velocity(i), state.velocity(j));
    mdot(vi, vj) + mdot(vi, xj) * mdot(vj, xi) / (1.0 - mdot(xi, xj))
}

/// `|P_ij v_j - v_i|` from the closed-form transported inner product.
pub fn misalignment(state: &FlockState, i: usize, j: usize) -> Result<f64> {
    check_index(state, &[i, j])?;
    if i == j {
        return Ok(0.0);
    }
    let (vi, vj) = (state.velocity(i), state.velocity(j));
    let sq = mdot(vi, vi) + mdot(vj, vj) - 2.0 * transported_inner(state, i, j);
    Ok(libm::sqrt(sq.max(0.0)))
}

/// `|P_ij v_j - v_i|` by transporting `v_j` and subtracting.
pub fn misalignment_transport(state: &FlockState, i: usize, j: usize) -> Result<f64> {
    check_index(state, &[i, j])?;
    let mut buf = vec![0.0; state.dim() + 1];
    Ok(libm::sqrt(defect_sq(state, i, j, &mut buf)))
}

fn defect_sq(state: &FlockState, i: usize, j: usize, buf: &mut [f64]) -> f64 {
    transport_raw(state.position(j), state.position(i), state.velocity(j), buf);
    let vi = state.velocity(i);
    buf.iter_mut().zip(vi).for_each(|(b, v)| *b -= v);
    mdot(buf, buf).max(0.0)
}

/// `max_ij |P_ij v_j - v_i|`, computed by explicit transport.
///
/// The closed form subtracts nearly equal quantities once the flock is
/// aligned and bottoms out near `sqrt(eps) |v|`; the explicit route keeps
/// full relative precision down to zero.
pub fn max_misalignment(state: &FlockState) -> f64 {
    let mut buf = vec![0.0; state.dim() + 1];
    let mut worst: f64 = 0.0;
    for i in 0..state.n() {
        for j in i + 1..state.n() {
            worst = worst.max(defect_sq(state, i, j, &mut buf));
        }
    }
    libm::sqrt(worst)
}

/// `max_ij d(x_i, x_j)`.
pub fn max_distance(state: &FlockState) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..state.n() {
        for j in i + 1..state.n() {
            worst = worst.max(distance_raw(state.position(i), state.position(j)));
        }
    }
    worst
}

/// `det(x_i | x_j | x_k)` on `H^2` (0-based indices).
pub fn coplanarity_det(state: &FlockState, i: usize, j: usize, k: usize) -> Result<f64> {
    if state.dim() != 2 {
        return Err(Error::UnsupportedDimension { expected: 2, found: state.dim() });
    }
    check_index(state, &[i, j, k])?;
    Ok(det3(state.position(i), state.position(j), state.position(k)))
}

/// `max_{i != j} |<x_j,v_i>/(1 - <x_i,x_j>)| - |v_i|`; nonpositive when the
/// bound holds, `-inf` for a single particle.
pub fn lemma41_check(state: &FlockState) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for i in 0..state.n() {
        let (xi, vi) = (state.position(i), state.velocity(i));
        let speed = libm::sqrt(mdot(vi, vi).max(0.0));
        for j in (0..state.n()).filter(|&j| j != i) {
            let xj = state.position(j);
            let lhs = libm::fabs(mdot(xj, vi) / (1.0 - mdot(xi, xj)));
            worst = worst.max(lhs - speed);
        }
    }
    worst
}

/// Both sides of the triple-transport inequality: `(pair_sum, triple_sum)`
/// with `triple_sum <= 9N pair_sum`.
pub fn lemma43_sums(state: &FlockState) -> (f64, f64) {
    let n = state.n();
    let w = state.dim() + 1;
    let mut buf = vec![0.0; w];
    let mut pairs = 0.0;
    for i in 0..n {
        for j in 0..n {
            pairs += defect_sq(state, i, j, &mut buf);
        }
    }
    let (mut a, mut b, mut c) = (vec![0.0; w], vec![0.0; w], vec![0.0; w]);
    let mut triples = 0.0;
    for k in 0..n {
        let (xk, vk) = (state.position(k), state.velocity(k));
        for j in 0..n {
            let xj = state.position(j);
            transport_raw(xk, xj, vk, &mut a);
            for i in 0..n {
                let xi = state.position(i);
                transport_raw(xj, xi, &a, &mut b);
                transport_raw(xi, xk, &b, &mut c);
                c.iter_mut().zip(vk).for_each(|(ck, v)| *ck -= v);
                triples += mdot(&c, &c).max(0.0);
            }
        }
    }
    (pairs, triples)
}

/// `9N * pair_sum - triple_sum`; nonnegative when the inequality holds.
pub fn lemma43_check(state: &FlockState) -> f64 {
    let (pairs, triples) = lemma43_sums(state);
    9.0 * state.n() as f64 * pairs - triples
}

/// `-(kappa/2N) sum_ij psi(x_i,x_j) |P_ij v_j - v_i|^2`, the exact rate of change of the energy.
pub fn dissipation_rate(state: &FlockState, kappa: f64, weight: &CommWeight) -> f64 {
    let n = state.n();
    let mut buf = vec![0.0; state.dim() + 1];
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += weight.eval(state.position(i), state.position(j)) * defect_sq(state, i, j, &mut buf);
            }
        }
    }
    -kappa / (2.0 * n as f64) * sum
}

/// Speed spread and the two candidate common limiting speeds.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpeedConsensus {
    pub min: f64,
    pub max: f64,
    /// `sqrt(E / N)`.
    pub limit_e_over_n: f64,
    /// `sqrt(2E / N)`, the common speed when all speeds agree.
    pub limit_2e_over_n: f64,
}

pub fn speed_consensus(state: &FlockState) -> SpeedConsensus {
    let speeds = (0..state.n()).map(|i| libm::sqrt(mdot(state.velocity(i), state.velocity(i)).max(0.0)));
    let (min, max) = speeds.fold((f64::INFINITY, 0.0f64), |(lo, hi), s| (lo.min(s), hi.max(s)));
    let e = energy(state);
    let n = state.n() as f64;
    SpeedConsensus { min, max, limit_e_over_n: libm::sqrt(e / n), limit_2e_over_n: libm::sqrt(2.0 * e / n) }
}

/// Worst excess over the a-priori bounds `|v_i| <= sqrt(2 E0)` and
/// `|cov. accel_i| <= 2 kappa psi_M sqrt(2 E0)`; nonpositive when both hold.
/// `None` for an unbounded weight.
pub fn bound_chain_residual(state: &FlockState, kappa: f64, weight: &CommWeight, e0: f64) -> Option<f64> {
    let psi_max = weight.upper_bound()?;
    let vmax = libm::sqrt(2.0 * e0);
    let acc = coupling_terms(state, kappa, weight);
    let w = state.dim() + 1;
    let mut worst = f64::NEG_INFINITY;
    for i in 0..state.n() {
        let vi = state.velocity(i);
        let ai = &acc[i * w..(i + 1) * w];
        worst = worst.max(libm::sqrt(mdot(vi, vi).max(0.0)) - vmax);
        worst = worst.max(libm::sqrt(mdot(ai, ai).max(0.0)) - 2.0 * kappa * psi_max * vmax);
    }
    Some(worst)
}

/// Which coplanarity determinants to record.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields))]
pub enum TripleSelection {
    /// Only particles 1, 2, 3.
    #[default]
    Default,
    All,
    /// A seeded random subset of distinct triples.
    Random {
        count: usize,
    },
    /// Explicit 1-based triples.
    List {
        triples: Vec<[usize; 3]>,
    },
}

impl TripleSelection {
    /// Resolves to 1-based index triples for `n` particles.
    pub fn resolve(&self, n: usize, seed: u64) -> Result<Vec<[usize; 3]>> {
        let all = || {
            let mut out = Vec::new();
            for i in 1..=n {
                for j in i + 1..=n {
                    for k in j + 1..=n {
                        out.push([i, j, k]);
                    }
                }
            }
            out
        };
        match self {
            TripleSelection::Default if n >= 3 => Ok(vec![[1, 2, 3]]),
            TripleSelection::Default => Ok(Vec::new()),
            TripleSelection::All => Ok(all()),
            TripleSelection::Random { count } => {
                let pool = all();
                let mut rng = SplitMix64::seed_from_u64(seed);
                let mut picked: Vec<usize> = sample(&mut rng, pool.len(), (*count).min(pool.len())).into_vec();
                picked.sort_unstable();
                Ok(picked.into_iter().map(|p| pool[p]).collect())
            }
            TripleSelection::List { triples } => {
                for t in triples {
                    if t.iter().any(|&i| i == 0 || i > n) {
                        return Err(Error::InvalidConfig {
                            key: "diagnostics.triples",
                            reason: alloc::format!("triple {t:?} is outside 1..={n}"),
                        });
                    }
                }
                Ok(triples.clone())
            }
        }
    }
}

/// Whether the cubic triple-transport monitor runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Lemma43Mode {
    /// On for `N <= 64`.
    #[default]
    Auto,
    On,
    Off,
}

/// Monitor selection for a run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct DiagConfig {
    pub triples: TripleSelection,
    pub lemma43: Lemma43Mode,
    /// Centered-difference check of the energy rate at sample times.
    pub dissipation: bool,
}

impl Default for DiagConfig {
    fn default() -> Self {
        Self { triples: TripleSelection::Default, lemma43: Lemma43Mode::Auto, dissipation: true }
    }
}

/// One sampled row of diagnostics.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiagRecord {
    pub step: u64,
    pub t: f64,
    pub energy: f64,
    pub max_misalign: f64,
    pub max_dist: f64,
    pub constraint_drift: f64,
    /// `|det(x_i|x_j|x_k)|` per configured 1-based triple; empty unless `d = 2`.
    pub coplanarity: Vec<([usize; 3], f64)>,
    pub lemma41_max: f64,
    pub lemma43_residual: Option<f64>,
    pub dissipation_rate: f64,
    /// Centered-difference energy rate minus [`DiagRecord::dissipation_rate`].
    pub dissipation_residual: Option<f64>,
    pub speed: SpeedConsensus,
    pub bound_chain_residual: Option<f64>,
    /// False for weights without the boundedness the alignment theory needs.
    pub alignment_applicable: bool,
}

/// Fixed per-run inputs for building [`DiagRecord`]s.
#[derive(Debug, Clone)]
pub struct DiagPlan {
    pub kappa: f64,
    pub weight: CommWeight,
    pub triples: Vec<[usize; 3]>,
    pub lemma43: bool,
    pub e0: f64,
}

impl DiagPlan {
    pub fn new(cfg: &DiagConfig, kappa: f64, weight: CommWeight, initial: &FlockState, seed: u64) -> Result<Self> {
        let triples = if initial.dim() == 2 { cfg.triples.resolve(initial.n(), seed)? } else { Vec::new() };
        let lemma43 = match cfg.lemma43 {
            Lemma43Mode::Auto => initial.n() <= LEMMA43_AUTO_MAX_N,
            Lemma43Mode::On => true,
            Lemma43Mode::Off => false,
        };
        Ok(Self { kappa, weight, triples, lemma43, e0: energy(initial) })
    }

    /// Snapshot diagnostics; the dissipation residual is filled in by the caller.
    pub fn record(&self, step: u64, state: &FlockState) -> DiagRecord {
        let applicable = self.weight.alignment_monitors_apply();
        DiagRecord {
            step,
            t: state.t(),
            energy: energy(state),
            max_misalign: max_misalignment(state),
            max_dist: max_distance(state),
            constraint_drift: state.constraint_drift(),
            coplanarity: self
                .triples
                .iter()
                .map(|&[i, j, k]| {
                    ([i, j, k], libm::fabs(det3(state.position(i - 1), state.position(j - 1), state.position(k - 1))))
                })
                .collect(),
            lemma41_max: lemma41_check(state),
            lemma43_residual: self.lemma43.then(|| lemma43_check(state)),
            dissipation_rate: dissipation_rate(state, self.kappa, &self.weight),
            dissipation_residual: None,
            speed: speed_consensus(state),
            bound_chain_residual: if applicable {
                bound_chain_residual(state, self.kappa, &self.weight, self.e0)
            } else {
                None
            },
            alignment_applicable: applicable,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minkowski::{project_tangent_in_place, HPoint};
    use rand::Rng;

    fn random_state(rng: &mut SplitMix64, n: usize, dim: usize, radius: f64) -> FlockState {
        let mut x = Vec::new();
        let mut v = Vec::new();
        for _ in 0..n {
            let u: Vec<f64> = (0..dim).map(|_| rng.random_range(-radius..radius)).collect();
            let p = HPoint::from_chart(&u).unwrap();
            let mut w: Vec<f64> = (0..=dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            project_tangent_in_place(p.as_slice(), &mut w);
            x.push(p.as_slice().to_vec());
            v.push(w);
        }
        FlockState::new(0.0, &x, &v).unwrap()
    }

    #[test]
    fn energy_examples() {
        let s =
            FlockState::new(0.0, &vec![vec![1.0, 0.0, 0.0]; 2], &[vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
        assert_eq!(energy(&s), 1.0);
        let rest = FlockState::new(0.0, &vec![vec![1.0, 0.0, 0.0]; 2], &vec![vec![0.0; 3]; 2]).unwrap();
        assert_eq!(energy(&rest), 0.0);
        assert_eq!(
            speed_consensus(&rest),
            SpeedConsensus { min: 0.0, max: 0.0, limit_e_over_n: 0.0, limit_2e_over_n: 0.0 }
        );
        assert!(lemma41_check(&rest) <= 0.0);
    }

    #[test]
    fn misalignment_routes_agree() {
        let mut rng = SplitMix64::seed_from_u64(11);
        for _ in 0..1000 {
            let s = random_state(&mut rng, 2, 3, 1.5);
            let a = misalignment(&s, 0, 1).unwrap();
            let b = misalignment_transport(&s, 0, 1).unwrap();
            assert!((a - b).abs() < 1e-12, "{a} {b}");
            assert_eq!(misalignment(&s, 1, 1).unwrap(), 0.0);
        }
        assert!(misalignment(&random_state(&mut rng, 2, 2, 1.0), 0, 2).is_err());
    }

    #[test]
    fn aligned_geodesic_pair() {
        let (c, sh) = (libm::cosh(0.8), libm::sinh(0.8));
        let s =
            FlockState::new(0.0, &[vec![1.0, 0.0, 0.0], vec![c, sh, 0.0]], &[vec![0.0, 1.0, 0.0], vec![sh, c, 0.0]])
                .unwrap();
        assert!(max_misalignment(&s) < 1e-15);
        let (pairs, triples) = lemma43_sums(&s);
        assert!(pairs < 1e-28 && triples < 1e-28);
    }

    #[test]
    fn coplanarity_examples() {
        let (c, sh) = (libm::cosh(1.0), libm::sinh(1.0));
        let x = vec![vec![1.0, 0.0, 0.0], vec![c, sh, 0.0], vec![c, 0.0, sh]];
        let s = FlockState::new(0.0, &x, &vec![vec![0.0; 3]; 3]).unwrap();
        assert!((coplanarity_det(&s, 0, 1, 2).unwrap() - sh * sh).abs() < 1e-14);
        let x = vec![vec![1.0, 0.0, 0.0], vec![c, sh, 0.0], vec![c, -sh, 0.0]];
        let s = FlockState::new(0.0, &x, &vec![vec![0.0; 3]; 3]).unwrap();
        assert_eq!(coplanarity_det(&s, 0, 1, 2).unwrap(), 0.0);
        let s3 = FlockState::new(0.0, &vec![vec![1.0, 0.0, 0.0, 0.0]; 3], &vec![vec![0.0; 4]; 3]).unwrap();
        assert!(matches!(coplanarity_det(&s3, 0, 1, 2), Err(Error::UnsupportedDimension { .. })));
    }

    #[test]
    fn inequalities_on_random_states() {
        let mut rng = SplitMix64::seed_from_u64(5);
        for _ in 0..200 {
            let s = random_state(&mut rng, 4, 2, 2.0);
            assert!(lemma41_check(&s) <= 1e-12);
            assert!(lemma43_check(&s) >= -1e-10);
            assert!(dissipation_rate(&s, 1.0, &CommWeight::UNIT) <= 0.0);
            let sp = speed_consensus(&s);
            for i in 0..4 {
                for j in 0..4 {
                    let di = libm::sqrt(mdot(s.velocity(i), s.velocity(i)));
                    let dj = libm::sqrt(mdot(s.velocity(j), s.velocity(j)));
                    assert!((di - dj).abs() <= misalignment_transport(&s, i, j).unwrap() + 1e-12);
                }
            }
            assert!(sp.min <= sp.max);
        }
    }

    #[test]
    fn triple_selection() {
        assert_eq!(TripleSelection::Default.resolve(10, 0).unwrap(), vec![[1, 2, 3]]);
        assert_eq!(TripleSelection::All.resolve(4, 0).unwrap().len(), 4);
        let r = TripleSelection::Random { count: 5 }.resolve(10, 3).unwrap();
        assert_eq!(r.len(), 5);
        assert_eq!(r, TripleSelection::Random { count: 5 }.resolve(10, 3).unwrap());
        assert!(TripleSelection::List { triples: vec![[1, 2, 11]] }.resolve(10, 0).is_err());
    }
}
