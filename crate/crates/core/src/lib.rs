//! Surrogate-assisted parallel tempering for landscape-evolution parameter inversion.
//!
//! The numerical kernels (forward model, likelihoods, surrogate network and
//! diagnostics) are generic over [`Real`]; the aliases below fix them to `f64`,
//! which is what the sampler uses.

pub mod diagnostics;
pub mod engine;
pub mod error;
pub mod lem;
pub mod likelihood;
pub mod proposals;
pub mod scalar;
pub mod surrogate;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Grid = lem::GridTopography<f64>;
pub type Parameters = lem::ParameterVector<f64>;
pub type Output = lem::SimulationOutput<f64>;
pub type Sediment = lem::SedimentRecord<f64>;
pub type LandscapeProblem = lem::Problem<f64>;
