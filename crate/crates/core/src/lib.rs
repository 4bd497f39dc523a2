//! Occupation-product wavefunction ansatz fitted to full-CI coefficients.

pub mod ansatz;
pub mod baseline;
pub mod cli;
pub mod error;
pub mod fci;
pub mod integrals;
pub mod metrics;
pub mod natural_orbitals;
pub mod solvers;

pub use error::{Error, Result};
