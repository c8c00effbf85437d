use thiserror::Error;

use crate::units::Unit;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot convert {from} to {to}: incompatible dimensions")]
    UnitMismatch { from: Unit, to: Unit },

    #[error("unknown unit `{0}`")]
    UnknownUnit(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("{0}")]
    Precondition(String),

    #[error("{what} did not converge (residual {residual:.3e})")]
    NoConvergence { what: &'static str, residual: f64 },

    #[error("time step too large: {0} (try dt <= {1:.4e} ps)")]
    TimeStep(String, f64),

    #[error("spectral bounds violated: {0}")]
    SpectralBounds(String),

    #[error("ill-conditioned signal subspace (condition {condition:.3e}): {advice}")]
    IllConditioned { condition: f64, advice: String },

    #[error("not implemented: {0}")]
    Unimplemented(&'static str),

    #[error("linear algebra failure: {0}")]
    Linalg(String),

    #[error("config error at `{key}`: {msg}")]
    Config { key: String, msg: String },

    #[error("{module}: {source}")]
    Module {
        module: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn config(key: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config { key: key.into(), msg: msg.into() }
    }

    pub fn in_module(self, module: &'static str) -> Self {
        match self {
            Error::Module { .. } | Error::Config { .. } => self,
            other => Error::Module { module, source: Box::new(other) },
        }
    }

    /// Configuration problems map to exit code 2, everything else numerical to 3.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Config { .. } | Error::UnknownUnit(_) | Error::UnitMismatch { .. } => true,
            Error::Module { source, .. } => source.is_config(),
            _ => false,
        }
    }
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(e.to_string())
    }
}
