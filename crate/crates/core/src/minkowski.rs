//! Minkowski bilinear algebra on R^(d+1) and the hyperboloid constraint layer.
//!
//! Points of hyperbolic space are stored extrinsically as vectors `x` with
//! `<x,x>_M = -1`, `x^0 > 0`; tangent vectors at `x` satisfy `<x,v>_M = 0`.
//! Index 0 is the timelike coordinate.

use alloc::vec::Vec;
use core::ops::{Add, Index, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Default tolerance for `|<x,x>_M + 1|` and `|<x,v>_M|`.
pub const DEFAULT_CONSTRAINT_TOL: f64 = 1e-10;

/// Timelike coordinate above which `<.,.>_M` loses most of its significant digits.
pub const OVERFLOW_GUARD_X0: f64 = 1e8;

/// `-a^0 b^0 + sum_k a^k b^k` on raw slices. Lengths must agree.
#[inline]
pub fn mdot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = -a[0] * b[0];
    for k in 1..a.len() {
        acc += a[k] * b[k];
    }
    acc
}

/// [`mdot`] evaluated in twice the working precision (error-free products
/// and sums), so the result is accurate even when the terms cancel.
pub fn mdot_compensated(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let (mut sum, mut err) = two_prod(-a[0], b[0]);
    for k in 1..a.len() {
        let (p, pe) = two_prod(a[k], b[k]);
        let (s, se) = two_sum(sum, p);
        sum = s;
        err += pe + se;
    }
    sum + err
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, libm::fma(a, b, -p))
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// A vector in Minkowski space R^(d+1) with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct MVec(Vec<f64>);

impl MVec {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.len() < 2 {
            return Err(Error::TooFewComponents { found: components.len() });
        }
        if components.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self(components))
    }

    pub fn from_slice(components: &[f64]) -> Result<Self> {
        Self::new(components.to_vec())
    }

    pub fn zeros(dim: usize) -> Self {
        Self(alloc::vec![0.0; dim + 1])
    }

    /// Spatial dimension `d` (the vector has `d + 1` components).
    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// `self + factor * other`.
    pub fn axpy(&self, factor: f64, other: &MVec) -> MVec {
        MVec(self.0.iter().zip(&other.0).map(|(a, b)| a + factor * b).collect())
    }

    pub fn max_abs_diff(&self, other: &MVec) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| libm::fabs(a - b)).fold(0.0, f64::max)
    }

    pub(crate) fn from_vec_unchecked(components: Vec<f64>) -> Self {
        Self(components)
    }
}

impl Index<usize> for MVec {
    type Output = f64;

    fn index(&self, k: usize) -> &f64 {
        &self.0[k]
    }
}

impl Add for &MVec {
    type Output = MVec;

    fn add(self, rhs: &MVec) -> MVec {
        MVec(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &MVec {
    type Output = MVec;

    fn sub(self, rhs: &MVec) -> MVec {
        MVec(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Mul<f64> for &MVec {
    type Output = MVec;

    fn mul(self, rhs: f64) -> MVec {
        MVec(self.0.iter().map(|a| a * rhs).collect())
    }
}

impl Neg for &MVec {
    type Output = MVec;

    fn neg(self) -> MVec {
        MVec(self.0.iter().map(|a| -a).collect())
    }
}

/// The Minkowski bilinear form `<a,b>_M`.
pub fn minkowski_inner(a: &MVec, b: &MVec) -> Result<f64> {
    if a.0.len() != b.0.len() {
        return Err(Error::DimensionMismatch { expected: a.0.len(), found: b.0.len() });
    }
    Ok(mdot(&a.0, &b.0))
}

/// A point on the upper sheet of the hyperboloid `<x,x>_M = -1`.
#[derive(Debug, Clone, PartialEq)]
pub struct HPoint {
    embed: MVec,
}

impl HPoint {
    /// Validates `embed` against the default constraint tolerance.
    pub fn new(embed: MVec) -> Result<Self> {
        Self::with_tolerance(embed, DEFAULT_CONSTRAINT_TOL)
    }

    pub fn with_tolerance(embed: MVec, tolerance: f64) -> Result<Self> {
        if embed[0] <= 0.0 {
            return Err(Error::LowerSheet { x0: embed[0] });
        }
        let residual = libm::fabs(mdot(embed.as_slice(), embed.as_slice()) + 1.0);
        if residual > tolerance {
            return Err(Error::NotOnHyperboloid { residual, tolerance });
        }
        Ok(Self { embed })
    }

    /// The chart inverse `u -> (sqrt(1 + |u|^2), u)`.
    pub fn from_chart(u: &[f64]) -> Result<Self> {
        if u.is_empty() {
            return Err(Error::TooFewComponents { found: 1 });
        }
        if u.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        let r2: f64 = u.iter().map(|c| c * c).sum();
        let mut embed = Vec::with_capacity(u.len() + 1);
        embed.push(libm::sqrt(1.0 + r2));
        embed.extend_from_slice(u);
        if !embed[0].is_finite() {
            return Err(Error::Overflow { context: "hpoint_from_chart" });
        }
        Ok(Self { embed: MVec(embed) })
    }

    /// The apex `(1, 0, ..., 0)` of `H^d`.
    pub fn apex(dim: usize) -> Self {
        let mut embed = alloc::vec![0.0; dim + 1];
        embed[0] = 1.0;
        Self { embed: MVec(embed) }
    }

    /// Radial projection `raw / sqrt(-<raw,raw>_M)` back onto the hyperboloid.
    pub fn project(raw: &MVec) -> Result<Self> {
        let mut buf = raw.as_slice().to_vec();
        project_point_in_place(&mut buf)?;
        Ok(Self { embed: MVec(buf) })
    }

    pub fn embed(&self) -> &MVec {
        &self.embed
    }

    pub fn as_slice(&self) -> &[f64] {
        self.embed.as_slice()
    }

    /// Chart coordinates: the spatial components `(x^1, ..., x^d)`.
    pub fn chart(&self) -> &[f64] {
        &self.embed.as_slice()[1..]
    }

    pub fn dim(&self) -> usize {
        self.embed.dim()
    }

    /// `|<x,x>_M + 1|`.
    pub fn constraint_residual(&self) -> f64 {
        libm::fabs(mdot(self.as_slice(), self.as_slice()) + 1.0)
    }

    pub(crate) fn from_embed_unchecked(embed: MVec) -> Self {
        Self { embed }
    }
}

/// A tangent vector attached to a base point.
#[derive(Debug, Clone, PartialEq)]
pub struct HTangent {
    base: HPoint,
    vec: MVec,
}

impl HTangent {
    pub fn new(base: HPoint, vec: MVec) -> Result<Self> {
        Self::with_tolerance(base, vec, DEFAULT_CONSTRAINT_TOL)
    }

    pub fn with_tolerance(base: HPoint, vec: MVec, tolerance: f64) -> Result<Self> {
        if vec.dim() != base.dim() {
            return Err(Error::DimensionMismatch { expected: base.dim() + 1, found: vec.dim() + 1 });
        }
        let residual = libm::fabs(mdot(base.as_slice(), vec.as_slice()));
        if residual > tolerance {
            return Err(Error::NotTangent { residual, tolerance });
        }
        Ok(Self { base, vec })
    }

    pub fn zero(base: HPoint) -> Self {
        let vec = MVec::zeros(base.dim());
        Self { base, vec }
    }

    pub fn base(&self) -> &HPoint {
        &self.base
    }

    pub fn vec(&self) -> &MVec {
        &self.vec
    }

    pub fn as_slice(&self) -> &[f64] {
        self.vec.as_slice()
    }

    /// `<v,v>_M`, nonnegative up to round-off for a valid tangent.
    /// `<v,v>_M`, compensated: far from the apex the components are of size
    /// `x^0 |v|` and plain summation loses `log2((x^0)^2)` bits.
    pub fn norm_sq(&self) -> f64 {
        mdot_compensated(self.vec.as_slice(), self.vec.as_slice())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { base: self.base.clone(), vec: &self.vec * factor }
    }

    pub(crate) fn from_parts_unchecked(base: HPoint, vec: MVec) -> Self {
        Self { base, vec }
    }
}

/// Chart inverse, as a free function.
pub fn hpoint_from_chart(u: &[f64]) -> Result<HPoint> {
    HPoint::from_chart(u)
}

/// Radial projection of a timelike upper-sheet vector onto the hyperboloid.
pub fn project_point(raw: &MVec) -> Result<HPoint> {
    HPoint::project(raw)
}

/// Minkowski-orthogonal projection `raw + <x,raw>_M x` onto `T_x H^d`.
pub fn project_tangent(x: &HPoint, raw: &MVec) -> Result<HTangent> {
    if raw.dim() != x.dim() {
        return Err(Error::DimensionMismatch { expected: x.dim() + 1, found: raw.dim() + 1 });
    }
    let mut buf = raw.as_slice().to_vec();
    project_tangent_in_place(x.as_slice(), &mut buf);
    Ok(HTangent { base: x.clone(), vec: MVec(buf) })
}

/// `sqrt(<v,v>_M)`; radicands within `-DEFAULT_CONSTRAINT_TOL` of zero are treated as zero.
pub fn tangent_norm(v: &HTangent) -> Result<f64> {
    let sq = v.norm_sq();
    if sq < -DEFAULT_CONSTRAINT_TOL {
        return Err(Error::NegativeNormSquared { value: sq });
    }
    Ok(libm::sqrt(sq.max(0.0)))
}

pub(crate) fn project_point_in_place(x: &mut [f64]) -> Result<()> {
    let sq = mdot_compensated(x, x);
    if !(sq < 0.0) || !(x[0] > 0.0) || !sq.is_finite() {
        return Err(Error::ProjectionFailure { norm_sq: sq });
    }
    let scale = 1.0 / libm::sqrt(-sq);
    x.iter_mut().for_each(|c| *c *= scale);
    Ok(())
}

pub(crate) fn project_tangent_in_place(x: &[f64], v: &mut [f64]) {
    let c = mdot(x, v);
    v.iter_mut().zip(x).for_each(|(vk, xk)| *vk += c * xk);
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn mv(c: &[f64]) -> MVec {
        MVec::from_slice(c).unwrap()
    }

    #[test]
    fn inner_examples() {
        assert_eq!(minkowski_inner(&mv(&[1.0, 0.0, 0.0]), &mv(&[1.0, 0.0, 0.0])).unwrap(), -1.0);
        assert_eq!(minkowski_inner(&mv(&[0.0, 1.0, 0.0]), &mv(&[0.0, 0.0, 1.0])).unwrap(), 0.0);
        let a = mv(&[libm::cosh(1.0), libm::sinh(1.0), 0.0]);
        assert_abs_diff_eq!(minkowski_inner(&a, &mv(&[1.0, 0.0, 0.0])).unwrap(), -1.5430806348, epsilon = 1e-10);
    }

    #[test]
    fn inner_rejects_dimension_mismatch() {
        let err = minkowski_inner(&mv(&[1.0, 0.0]), &mv(&[1.0, 0.0, 0.0])).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
        assert!(matches!(MVec::new(vec![1.0]), Err(Error::TooFewComponents { .. })));
        assert!(matches!(MVec::new(vec![1.0, f64::NAN]), Err(Error::NonFinite)));
    }

    #[test]
    fn chart_examples() {
        assert_eq!(HPoint::from_chart(&[0.0, 0.0]).unwrap().as_slice(), &[1.0, 0.0, 0.0]);
        let p = HPoint::from_chart(&[1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(p.as_slice()[0], libm::sqrt(2.0), epsilon = 1e-15);
        let q = HPoint::from_chart(&[3.0, 4.0]).unwrap();
        assert_abs_diff_eq!(q.as_slice()[0], libm::sqrt(26.0), epsilon = 1e-15);
        assert!(q.constraint_residual() < 1e-14);
        assert!(matches!(HPoint::from_chart(&[f64::INFINITY, 0.0]), Err(Error::NonFinite)));
    }

    #[test]
    fn point_validation() {
        assert!(matches!(HPoint::new(mv(&[-1.0, 0.0, 0.0])), Err(Error::LowerSheet { .. })));
        assert!(matches!(HPoint::new(mv(&[1.0, 1.0, 0.0])), Err(Error::NotOnHyperboloid { .. })));
        assert!(HPoint::with_tolerance(mv(&[1.0, 1e-4, 0.0]), 1e-7).is_ok());
    }

    #[test]
    fn project_point_examples() {
        assert_eq!(project_point(&mv(&[2.0, 0.0, 0.0])).unwrap().as_slice(), &[1.0, 0.0, 0.0]);
        let (c, s) = (libm::cosh(1.0), libm::sinh(1.0));
        let p = project_point(&mv(&[1.1 * c, 1.1 * s, 0.0])).unwrap();
        assert_abs_diff_eq!(p.as_slice()[0], c, epsilon = 1e-14);
        assert_abs_diff_eq!(p.as_slice()[1], s, epsilon = 1e-14);
        let again = project_point(p.embed()).unwrap();
        assert!(again.embed().max_abs_diff(p.embed()) < 1e-15);
    }

    #[test]
    fn project_point_rejects_spacelike_and_null() {
        assert!(matches!(project_point(&mv(&[0.5, 1.0, 0.0])), Err(Error::ProjectionFailure { .. })));
        assert!(matches!(project_point(&mv(&[1.0, 1.0, 0.0])), Err(Error::ProjectionFailure { .. })));
        assert!(matches!(project_point(&mv(&[-2.0, 0.0, 0.0])), Err(Error::ProjectionFailure { .. })));
    }

    #[test]
    fn project_tangent_examples() {
        let apex = HPoint::apex(2);
        assert_eq!(project_tangent(&apex, &mv(&[0.0, 1.0, 0.0])).unwrap().as_slice(), &[0.0, 1.0, 0.0]);
        assert_eq!(project_tangent(&apex, &mv(&[1.0, 0.0, 0.0])).unwrap().as_slice(), &[0.0, 0.0, 0.0]);
        let x = HPoint::new(mv(&[libm::cosh(1.0), libm::sinh(1.0), 0.0])).unwrap();
        let v = project_tangent(&x, &mv(&[1.0, 1.0, 1.0])).unwrap();
        assert!(libm::fabs(mdot(x.as_slice(), v.as_slice())) < 1e-14);
    }

    #[test]
    fn tangent_norm_examples() {
        let apex = HPoint::apex(2);
        assert_eq!(tangent_norm(&HTangent::zero(apex.clone())).unwrap(), 0.0);
        let v = HTangent::new(apex, mv(&[0.0, 3.0, 4.0])).unwrap();
        assert_eq!(tangent_norm(&v).unwrap(), 5.0);
        let x = HPoint::new(mv(&[libm::cosh(1.0), libm::sinh(1.0), 0.0])).unwrap();
        let w = HTangent::new(x, mv(&[libm::sinh(1.0), libm::cosh(1.0), 0.0])).unwrap();
        assert_abs_diff_eq!(tangent_norm(&w).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn tangent_norm_rejects_timelike() {
        let apex = HPoint::apex(1);
        let bogus = HTangent::from_parts_unchecked(apex, mv(&[1.0, 0.0]));
        assert!(matches!(tangent_norm(&bogus), Err(Error::NegativeNormSquared { .. })));
    }

    fn vec3() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-5.0..5.0f64, 4)
    }

    fn chart3() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-3.0..3.0f64, 3)
    }

    proptest! {
        #[test]
        fn bilinear_and_symmetric(a in vec3(), b in vec3(), c in vec3(), lambda in -3.0..3.0f64) {
            let combo: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + lambda * y).collect();
            let lhs = mdot(&combo, &c);
            let rhs = mdot(&a, &c) + lambda * mdot(&b, &c);
            prop_assert!((lhs - rhs).abs() < 1e-12 * (1.0 + lhs.abs()));
            prop_assert_eq!(mdot(&a, &b), mdot(&b, &a));
        }

        #[test]
        fn chart_round_trip(u in chart3()) {
            let p = HPoint::from_chart(&u).unwrap();
            for (a, b) in p.chart().iter().zip(&u) {
                prop_assert!((a - b).abs() < 1e-14);
            }
            prop_assert!(p.constraint_residual() < 1e-12);
        }

        #[test]
        fn projections_idempotent(u in chart3(), scale in 0.2..5.0f64, raw in vec3(), raw2 in vec3(), mu in -2.0..2.0f64) {
            let p = HPoint::from_chart(&u).unwrap();
            let scaled = p.embed() * scale;
            let once = project_point(&scaled).unwrap();
            let twice = project_point(once.embed()).unwrap();
            prop_assert!(once.embed().max_abs_diff(p.embed()) < 1e-12 * p.as_slice()[0]);
            prop_assert!(twice.embed().max_abs_diff(once.embed()) < 1e-13 * p.as_slice()[0]);

            let r = mv(&raw);
            let t1 = project_tangent(&p, &r).unwrap();
            let t2 = project_tangent(&p, t1.vec()).unwrap();
            let tol = 1e-11 * p.as_slice()[0] * p.as_slice()[0] * (1.0 + raw.iter().map(|c| c.abs()).sum::<f64>());
            prop_assert!(t2.vec().max_abs_diff(t1.vec()) < tol);

            // linearity
            let r2 = mv(&raw2);
            let combo = r.axpy(mu, &r2);
            let lhs = project_tangent(&p, &combo).unwrap();
            let rhs = t1.vec().axpy(mu, project_tangent(&p, &r2).unwrap().vec());
            prop_assert!(lhs.vec().max_abs_diff(&rhs) < 4.0 * tol);
        }
    }

    #[test]
    fn tangent_spaces_are_spacelike() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_xoshiro::SplitMix64::seed_from_u64(7);
        for _ in 0..10_000 {
            let u: Vec<f64> = (0..3).map(|_| rng.random_range(-3.0..3.0)).collect();
            let raw: Vec<f64> = (0..4).map(|_| rng.random_range(-5.0..5.0)).collect();
            let p = HPoint::from_chart(&u).unwrap();
            let v = project_tangent(&p, &mv(&raw)).unwrap();
            let scale = p.as_slice()[0] * p.as_slice()[0] * 100.0;
            assert!(v.norm_sq() >= -1e-14 * scale, "negative norm {}", v.norm_sq());
        }
    }
}
