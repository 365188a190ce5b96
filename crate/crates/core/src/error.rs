use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite sample at index {index} (value {value})")]
    NonFinite { index: usize, value: f64 },

    #[error("zero-variance input: correlation is undefined for a constant signal")]
    ZeroVariance,

    #[error("zero-power signal: cannot set a noise level relative to it")]
    ZeroPower,

    #[error("covariance is singular or near-singular (eigenvalue ratio {ratio:e}); the mixture is degenerate")]
    SingularCovariance { ratio: f64 },

    #[error("cannot place {pulses} pulses of width {width} in {n} samples without overlap")]
    PulsesDoNotFit { pulses: usize, width: f64, n: usize },

    #[error("unsupported encoding/corrupt header in {path}: {detail}")]
    UnsupportedWav { path: PathBuf, detail: String },

    #[error("malformed CSV {path} line {line}: {detail}")]
    MalformedCsv {
        path: PathBuf,
        line: usize,
        detail: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
