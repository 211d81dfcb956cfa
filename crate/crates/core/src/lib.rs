//! Classical difference- and sum-frequency generation and spontaneous
//! parametric down-conversion in lossy χ(2) waveguides, with the
//! quantum-classical ratios that link them.

pub mod convergence;
pub mod error;
pub mod kernels;
pub mod model;
pub mod observables;
pub mod quadrature;
pub mod oracle;
pub mod ratios;
pub mod scenario;

pub use error::{Error, Result};
