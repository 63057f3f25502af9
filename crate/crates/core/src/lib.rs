pub mod cli;
pub mod coefficients;
pub mod config;
pub mod error;
pub mod mesh;
pub mod potential;
pub mod report;
pub mod shooting;
pub mod solution;
pub mod special;
pub mod spectral;
pub mod spps;

pub use error::{NsbfError, Result};
pub use potential::{Potential, PotentialSpec};
pub use solution::NsbfSolution;
pub use spectral::{Boundary, Eigenpair, SpectralProblem};
