//! Sensitivity analysis for randomized submodular maximization.

pub mod algorithms;
pub mod distributions;
pub mod distsim;
pub mod error;
pub mod harness;
pub mod mask;
pub mod oracle;
pub mod sensitivity;
pub mod transport;

pub use error::{Error, Result};
pub use mask::SubsetMask;
