//! Numerical laboratory for the damped semilinear wave equation
//!
//! ```text
//! ∂ₜ²u − Δu = −2Ω ∂ₜu + e^{−κt} a(t,x) (1+u)^μ      on [0,∞) × T³
//! ```
//!
//! The crate provides a pseudo-spectral solver with an exponential
//! integrator that is exact on the linear damped-wave part, the energy
//! functionals that control the solution, the threshold algebra of the
//! small-data global existence argument, and a verifier that checks each
//! energy inequality along a computed trajectory.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the aliases at
//! the crate root fix the common `f64` instantiation.

// `!(x > 0)` is used throughout so that NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibrate;
pub mod energy;
pub mod error;
pub mod estimates;
pub mod scalar;
pub mod scenario;
pub mod solver;
pub mod source;
pub mod torus;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Field64 = torus::Field<f64>;
pub type Field32 = torus::Field<f32>;
pub type Spectrum64 = torus::Spectrum<f64>;
pub type Spectrum32 = torus::Spectrum<f32>;
pub type ModelParams64 = source::ModelParams<f64>;
pub type SourceSpec64 = source::SourceSpec<f64>;
pub type EnergySample64 = energy::EnergySample<f64>;
pub type SolverState64 = solver::SolverState<f64>;
pub type SolverConfig64 = solver::SolverConfig<f64>;
pub type Trajectory64 = solver::Trajectory<f64>;
pub type BootstrapParams64 = estimates::BootstrapParams<f64>;
pub type Scenario64 = scenario::Scenario<f64>;
pub type VerificationReport64 = verify::VerificationReport<f64>;
