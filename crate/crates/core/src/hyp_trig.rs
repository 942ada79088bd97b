//! Geodesic triangles on `H^2`: angles, area (angle deficit and L'Huilier),
//! the law of sines as a determinant identity, and holonomy around the loop.

use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{distance_raw, parallel_transport};
use crate::minkowski::{mdot, tangent_norm, HPoint, HTangent};

/// Triangles whose `sinh` side factors fall below this are rejected by the
/// angle-based operations.
pub const DEFAULT_DEGENERATE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Vertex {
    A,
    B,
    C,
}

/// A geodesic triangle with vertices on `H^2`.
///
/// Side `a` is opposite vertex `A`: `a = d(B,C)`, `b = d(C,A)`, `c = d(A,B)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HTriangle {
    vertices: [HPoint; 3],
    sides: [f64; 3],
    degenerate_tol: f64,
}

impl HTriangle {
    pub fn new(a: HPoint, b: HPoint, c: HPoint) -> Result<Self> {
        for v in [&a, &b, &c] {
            if v.dim() != 2 {
                return Err(Error::UnsupportedDimension { expected: 2, found: v.dim() });
            }
        }
        let sides = [
            distance_raw(b.as_slice(), c.as_slice()),
            distance_raw(c.as_slice(), a.as_slice()),
            distance_raw(a.as_slice(), b.as_slice()),
        ];
        Ok(Self { vertices: [a, b, c], sides, degenerate_tol: DEFAULT_DEGENERATE_TOL })
    }

    pub fn with_degenerate_tol(mut self, tol: f64) -> Self {
        self.degenerate_tol = tol;
        self
    }

    pub fn vertex(&self, v: Vertex) -> &HPoint {
        &self.vertices[v as usize]
    }

    /// Length of the side opposite `v`.
    pub fn side(&self, v: Vertex) -> f64 {
        self.sides[v as usize]
    }

    /// Indices (vertex, next, previous) in cyclic order.
    fn cyclic(v: Vertex) -> (usize, usize, usize) {
        match v {
            Vertex::A => (0, 1, 2),
            Vertex::B => (1, 2, 0),
            Vertex::C => (2, 0, 1),
        }
    }

    /// Cosine of the interior angle at `v` from the hyperbolic law of cosines.
    ///
    /// `cosh` of each side is read directly off the Minkowski form.
    fn cos_angle(&self, v: Vertex) -> Result<f64> {
        let (o, n, p) = Self::cyclic(v);
        let x = |i: usize| self.vertices[i].as_slice();
        let cosh_opp = -mdot(x(n), x(p));
        let cosh_s1 = -mdot(x(o), x(n));
        let cosh_s2 = -mdot(x(o), x(p));
        let sinh_s1 = libm::sinh(self.sides[p]);
        let sinh_s2 = libm::sinh(self.sides[n]);
        let factor = sinh_s1.min(sinh_s2);
        if factor < self.degenerate_tol {
            return Err(Error::DegenerateTriangle { factor, tolerance: self.degenerate_tol });
        }
        let cos = (cosh_s1 * cosh_s2 - cosh_opp) / (sinh_s1 * sinh_s2);
        Ok(cos.clamp(-1.0, 1.0))
    }

    /// Interior angle at `v`, in radians.
    pub fn interior_angle(&self, v: Vertex) -> Result<f64> {
        Ok(libm::acos(self.cos_angle(v)?))
    }

    /// `pi - (A + B + C)`.
    pub fn area_angle_deficit(&self) -> Result<f64> {
        let sum = self.interior_angle(Vertex::A)? + self.interior_angle(Vertex::B)? + self.interior_angle(Vertex::C)?;
        Ok((PI - sum).max(0.0))
    }

    /// Area from two sides and the included angle at `v`:
    /// `tan(Area/2) = t_b t_c sin A / (1 - t_b t_c cos A)` with `t = tanh(side/2)`.
    pub fn area_lhuilier_at(&self, v: Vertex) -> Result<f64> {
        let (_, n, p) = Self::cyclic(v);
        let cos = self.cos_angle(v)?;
        let sin = libm::sqrt((1.0 - cos * cos).max(0.0));
        let t = libm::tanh(0.5 * self.sides[n]) * libm::tanh(0.5 * self.sides[p]);
        Ok(2.0 * libm::atan2(t * sin, 1.0 - t * cos))
    }

    /// L'Huilier area with the formula stated at vertex `A`.
    pub fn area_lhuilier(&self) -> Result<f64> {
        self.area_lhuilier_at(Vertex::A)
    }

    /// `|sinh b sinh c sin A| - |det(A|B|C)|`.
    pub fn law_of_sines_residual(&self) -> Result<f64> {
        Ok(self.law_of_sines_lhs()? - libm::fabs(self.vertex_determinant()))
    }

    /// `|sinh b sinh c sin A|`.
    pub fn law_of_sines_lhs(&self) -> Result<f64> {
        let cos = match self.cos_angle(Vertex::A) {
            Ok(c) => c,
            // a collapsed side makes the product vanish regardless of the angle
            Err(Error::DegenerateTriangle { .. }) => return Ok(0.0),
            Err(e) => return Err(e),
        };
        let sin = libm::sqrt((1.0 - cos * cos).max(0.0));
        Ok(libm::fabs(libm::sinh(self.sides[1]) * libm::sinh(self.sides[2]) * sin))
    }

    /// Determinant of the 3x3 matrix whose columns are the embedded vertices.
    pub fn vertex_determinant(&self) -> f64 {
        det3(self.vertices[0].as_slice(), self.vertices[1].as_slice(), self.vertices[2].as_slice())
    }

    /// `a` recomputed from `b`, `c` and the angle at `A`, minus `a`.
    pub fn law_of_cosines_residual(&self) -> Result<f64> {
        let (b, c) = (self.sides[1], self.sides[2]);
        let cos = self.cos_angle(Vertex::A)?;
        let cosh_a = libm::cosh(b) * libm::cosh(c) - libm::sinh(b) * libm::sinh(c) * cos;
        Ok(libm::acosh(cosh_a.max(1.0)) - self.sides[0])
    }

    /// Transports `v` (based at `A`) around `A -> C -> B -> A` and returns
    /// `||loop(v) - v||`.
    pub fn holonomy_defect(&self, v: &HTangent) -> Result<f64> {
        let [a, b, c] = &self.vertices;
        if v.base() != a {
            HTangent::new(a.clone(), v.vec().clone())?;
        }
        let at_c = parallel_transport(a, c, v)?;
        let at_b = parallel_transport(c, b, &at_c)?;
        let back = parallel_transport(b, a, &at_b)?;
        let diff = HTangent::from_parts_unchecked(a.clone(), back.vec() - v.vec());
        tangent_norm(&diff)
    }

    /// `||v|| sqrt(2 - 2 cos Area)`, evaluated as `2 ||v|| sin(Area/2)`.
    pub fn holonomy_expected(&self, v: &HTangent) -> Result<f64> {
        let area = self.area_lhuilier()?;
        Ok(2.0 * tangent_norm(v)? * libm::sin(0.5 * area))
    }
}

pub(crate) fn det3(c0: &[f64], c1: &[f64], c2: &[f64]) -> f64 {
    c0[0] * (c1[1] * c2[2] - c1[2] * c2[1]) - c1[0] * (c0[1] * c2[2] - c0[2] * c2[1])
        + c2[0] * (c0[1] * c1[2] - c0[2] * c1[1])
}
