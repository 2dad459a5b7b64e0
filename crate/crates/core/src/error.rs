use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the transmit, channel, sync or receive chain.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    Length { expected: usize, actual: usize },

    #[error("insufficient samples: need {needed}, have {available}")]
    Range { needed: usize, available: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("no frame detected (peak metric {peak:.4} below threshold {threshold:.4})")]
    NoFrame { peak: f64, threshold: f64 },

    #[error("target {target:e} not bracketed by curve; nearest endpoint {nearest_osnr_db} dB (BER {nearest_ber:e})")]
    NotBracketed {
        target: f64,
        nearest_osnr_db: f64,
        nearest_ber: f64,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
