use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid automaton configuration: {0}")]
    InvalidAutomaton(String),

    #[error("invalid hyperparameters: {0}")]
    InvalidHyperParams(String),

    #[error("clause must have at least one feature")]
    NoFeatures,

    #[error("sample fraction {0} is outside (0, 1]")]
    InvalidSampleFraction(f64),

    #[error("literal {literal} is out of range for {n_features} features")]
    LiteralOutOfRange { literal: u32, n_features: usize },

    #[error("literal {0} is not held by a live automaton in this clause")]
    LiteralNotLive(u32),

    #[error("model has no registered classes")]
    NoClasses,

    #[error("feature width mismatch: model expects {expected}, data has {found}")]
    FeatureWidth { expected: usize, found: usize },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("absorbing barriers are not supported by the dense reference machine")]
    BarrierInReference,

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("unsupported model file version: {0:?}")]
    ModelVersion(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
