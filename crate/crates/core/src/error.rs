use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, QmlError>;

#[derive(Debug, Error)]
pub enum QmlError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A constraint set that no PSD matrix can satisfy, e.g. a zero intra-class sample.
    #[error("infeasible problem: {0}")]
    Infeasible(String),

    #[error("class {class} is infeasible: {reason}")]
    ClassInfeasible { class: usize, reason: String },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("objective unbounded below: {0}")]
    Unbounded(String),

    #[error("feature vector has zero norm")]
    DegenerateFeature,

    #[error("no feasible grid point (infeasible problem or grid too coarse)")]
    GridTooCoarse,

    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("model format error: {0}")]
    Format(String),

    #[error("unsupported model version {found} (this build reads version {supported})")]
    Version { found: u32, supported: u32 },

    #[error("model file truncated")]
    Truncated,

    #[error("model checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    Checksum { stored: u32, computed: u32 },

    #[error("i/o error on {path:?}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl QmlError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        QmlError::InvalidInput(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        QmlError::Io {
            path: path.into(),
            source,
        }
    }

    /// True for the error kinds the CLI reports as an infeasible problem.
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            QmlError::Infeasible(_) | QmlError::ClassInfeasible { .. } | QmlError::GridTooCoarse
        )
    }

    pub fn is_numerical(&self) -> bool {
        matches!(self, QmlError::NumericalFailure(_) | QmlError::Unbounded(_))
    }
}
