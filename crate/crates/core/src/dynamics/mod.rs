//! The flocking vector field, its projected RK4 integrator, run driver,
//! and the hyperbolic Kuramoto reduction.

mod hcs;
pub mod hk;
mod init;
mod integrate;
mod simulate;
mod state;
mod weight;

pub use hcs::{coupling_terms, hcs_rhs, RHS_CORRUPTION_TOL};
pub use init::{geodesic_state, Initializer, RNG_ALGORITHM};
pub use integrate::{rk4_step, HcsIntegrator};
pub use simulate::{simulate, DiagnosticSink, Projection, RunError, SimConfig};
pub use state::FlockState;
pub use weight::CommWeight;
