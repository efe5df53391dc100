use thiserror::Error;

use crate::fock::FockIndex;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("mode {mode} out of range for a {nmodes}-mode space")]
    ModeOutOfRange { mode: usize, nmodes: usize },

    #[error("index {index} outside cutoffs {cutoffs:?}")]
    IndexOutOfRange { index: FockIndex, cutoffs: Vec<usize> },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Duschinsky matrix is a reflection (det = {det:.6}); only proper rotations are supported")]
    UnsupportedReflection { det: f64 },

    #[error("matrix is not a 2x2 rotation: {0}")]
    NotARotation(String),

    #[error("unsupported mode count {nmodes}: the rotation stage is only defined for 2 modes")]
    UnsupportedDimension { nmodes: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("auto cutoff reached the cap of {cutoff} per mode with leakage {leakage:.3e} (target {target:.1e})")]
    CutoffCapExceeded { cutoff: usize, leakage: f64, target: f64 },

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("transfer fidelity F_D.M is zero for target {target}; cannot correct")]
    ZeroTransferFidelity { target: FockIndex },

    #[error("{path}: {message}")]
    Parse { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Coarse classification used by the command-line driver for exit codes.
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Parse { .. } | Error::Config(_) => ErrorKind::Input,
            Error::CutoffCapExceeded { .. } | Error::Numeric(_) => ErrorKind::Numeric,
            Error::Io(_) => ErrorKind::Io,
            _ => ErrorKind::Model,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Numeric,
    Model,
    Io,
}
