//! Quantum hypothesis testing: Chernoff distance, Hoeffding error exponents
//! and Stein rates for finite-dimensional density matrices.

pub mod error;
pub mod extended;
pub mod linalg;
pub mod states;
pub mod discrimination;
pub mod mapping;
pub mod chernoff;
pub mod hoeffding;
pub mod asymptotics;
pub mod verify;
pub mod cli;
mod optimize;

pub use error::{Error, Result};
pub use extended::ExtendedReal;
pub use linalg::{HermitianMatrix, Projector, SpectralDecomposition, CMatrix, C64};
pub use states::{DensityMatrix, Priors};
