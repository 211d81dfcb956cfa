use num_complex::Complex64;
use thiserror::Error;

use crate::model::Process;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("invalid inputs for {process}: {reason}")]
    InvalidProcess { process: Process, reason: String },

    #[error("non-finite integrand sample at abscissa {abscissa}")]
    NumericalDomain { abscissa: f64 },

    #[error("time quadrature did not converge: relative change {achieved:.3e} > {requested:.3e} after {nodes} nodes")]
    ConvergenceFailure {
        best: Vec<Complex64>,
        achieved: f64,
        requested: f64,
        nodes: usize,
    },

    #[error("signal and idler share the grid bin at k = {k}")]
    DegenerateBin { k: f64 },

    #[error("wavenumber {k} is not a node of the grid [{min}, {max}]")]
    OffGrid { k: f64, min: f64, max: f64 },

    #[error("ratio undefined: pair density {pair_density:e} is below {threshold:e}")]
    UndefinedRatio { pair_density: f64, threshold: f64 },

    #[error("Fock truncation lost norm: {norm} < {threshold}")]
    Truncation { norm: f64, threshold: f64 },

    #[error("invalid oracle input: {0}")]
    InvalidInput(String),

    #[error("oracle grid of {cells} cells exceeds the limit of {limit}")]
    ResourceLimit { cells: usize, limit: usize },
}

impl Error {
    pub(crate) fn param(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
