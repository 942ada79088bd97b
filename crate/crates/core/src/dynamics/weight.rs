use crate::error::{Error, Result};
use crate::geometry::distance_raw;
use crate::minkowski::mdot;

/// Communication weight `psi(x, y)`, a symmetric nonnegative function of the
/// geodesic distance between two particles.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields))]
pub enum CommWeight {
    /// `psi = c`.
    Constant { c: f64 },
    /// `psi = (1 + d^2)^(-beta)`.
    CsKernel { beta: f64 },
    /// `psi = exp(-lambda d)`.
    ExpKernel { lambda: f64 },
    /// `psi = -<x,y>_M = cosh d`. Unbounded; used for the Kuramoto reduction.
    CoshDistance,
}

impl CommWeight {
    pub const UNIT: CommWeight = CommWeight::Constant { c: 1.0 };

    /// Weight between two embedded points.
    #[inline]
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            CommWeight::Constant { c } => c,
            CommWeight::CsKernel { beta } => {
                let d = distance_raw(x, y);
                libm::pow(1.0 + d * d, -beta)
            }
            CommWeight::ExpKernel { lambda } => libm::exp(-lambda * distance_raw(x, y)),
            CommWeight::CoshDistance => -mdot(x, y),
        }
    }

    /// Weight as a function of geodesic distance alone.
    pub fn of_distance(&self, d: f64) -> f64 {
        match *self {
            CommWeight::Constant { c } => c,
            CommWeight::CsKernel { beta } => libm::pow(1.0 + d * d, -beta),
            CommWeight::ExpKernel { lambda } => libm::exp(-lambda * d),
            CommWeight::CoshDistance => libm::cosh(d),
        }
    }

    /// Declared upper bound `psi_M`; `None` for an unbounded kernel.
    pub fn upper_bound(&self) -> Option<f64> {
        match *self {
            CommWeight::Constant { c } => Some(c),
            CommWeight::CsKernel { .. } | CommWeight::ExpKernel { .. } => Some(1.0),
            CommWeight::CoshDistance => None,
        }
    }

    /// Declared lower bound `psi_m` valid over all of `H^d`, when positive.
    ///
    /// The distance kernels only have a positive lower bound on configurations
    /// with bounded diameter, so none is declared for them.
    pub fn lower_bound(&self) -> Option<f64> {
        match *self {
            CommWeight::Constant { c } if c > 0.0 => Some(c),
            CommWeight::CoshDistance => Some(1.0),
            _ => None,
        }
    }

    /// Whether the velocity-alignment and bound-chain monitors apply: the
    /// kernel must be bounded and positive on bounded configurations.
    pub fn alignment_monitors_apply(&self) -> bool {
        match *self {
            CommWeight::Constant { c } => c > 0.0,
            CommWeight::CsKernel { .. } | CommWeight::ExpKernel { .. } => true,
            CommWeight::CoshDistance => false,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CommWeight::Constant { .. } => "constant",
            CommWeight::CsKernel { .. } => "cs_kernel",
            CommWeight::ExpKernel { .. } => "exp_kernel",
            CommWeight::CoshDistance => "cosh_distance",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: &str| Err(Error::InvalidConfig { key: "weight", reason: reason.into() });
        match *self {
            CommWeight::Constant { c } if !(c >= 0.0 && c.is_finite()) => bad("constant c must be finite and >= 0"),
            CommWeight::CsKernel { beta } if !(beta >= 0.0 && beta.is_finite()) => {
                bad("cs_kernel beta must be finite and >= 0")
            }
            CommWeight::ExpKernel { lambda } if !(lambda >= 0.0 && lambda.is_finite()) => {
                bad("exp_kernel lambda must be finite and >= 0")
            }
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minkowski::HPoint;
    use approx::assert_abs_diff_eq;

    #[test]
    fn kernels_are_symmetric_and_bounded() {
        let x = HPoint::from_chart(&[0.3, -0.8]).unwrap();
        let y = HPoint::from_chart(&[-1.1, 0.4]).unwrap();
        let d = distance_raw(x.as_slice(), y.as_slice());
        for w in [
            CommWeight::UNIT,
            CommWeight::CsKernel { beta: 0.5 },
            CommWeight::ExpKernel { lambda: 0.7 },
            CommWeight::CoshDistance,
        ] {
            let a = w.eval(x.as_slice(), y.as_slice());
            assert_eq!(a, w.eval(y.as_slice(), x.as_slice()));
            assert!(a >= 0.0);
            assert_abs_diff_eq!(a, w.of_distance(d), epsilon = 1e-12);
            if let Some(m) = w.upper_bound() {
                assert!(a <= m);
            }
            if let Some(m) = w.lower_bound() {
                assert!(a >= m);
            }
        }
        assert!(!CommWeight::CoshDistance.alignment_monitors_apply());
        assert!(CommWeight::UNIT.alignment_monitors_apply());
    }

    #[test]
    fn validation() {
        assert!(CommWeight::Constant { c: -1.0 }.validate().is_err());
        assert!(CommWeight::CsKernel { beta: f64::NAN }.validate().is_err());
        assert!(CommWeight::ExpKernel { lambda: 2.0 }.validate().is_ok());
    }
}
