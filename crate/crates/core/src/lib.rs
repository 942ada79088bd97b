//! Cucker-Smale flocking on the hyperboloid model of hyperbolic space.
//!
//! The crate is `no_std` and needs only `alloc`. Modules, bottom-up:
//!
//! - [`minkowski`]: the Minkowski form, hyperboloid points and tangent vectors.
//! - [`geometry`]: geodesics, distance, log map, parallel transport and the
//!   chart-coordinate ODE oracles in [`geometry::oracle`].
//! - [`hyp_trig`]: geodesic triangles on `H^2`.
//! - [`dynamics`]: the flocking vector field, the projected RK4 integrator,
//!   the hyperbolic Kuramoto model and the geodesic reduction.
//! - [`diagnostics`]: energy, misalignment, coplanarity and inequality monitors.
//! - [`verify`]: randomized identity and oracle-equivalence suites.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod hyp_trig;
pub mod minkowski;
pub mod ode;
pub mod verify;

pub use error::{Error, Result};
