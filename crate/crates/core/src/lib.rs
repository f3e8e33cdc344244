pub mod analysis;
pub mod config;
pub mod continuation;
pub mod diagram;
pub mod error;
pub mod euler;
pub mod families;
pub mod galerkin;
pub mod group;
pub mod linalg;
pub mod pipeline;
pub mod polynomial;
pub mod problem;
pub mod representation;
pub mod scalar;
pub mod spectra;
pub mod verify;

pub use error::{Error, Result};

/// Double-precision instances of the scalar-generic types.
pub type Problem = problem::EllipticProblem<f64>;
pub type Representation = representation::OrthogonalRepresentation<f64>;
pub type Galerkin = galerkin::GalerkinSystem<f64>;
pub type Branch = continuation::Branch<f64>;
pub type BranchPoint = continuation::BranchPoint<f64>;
