use std::path::PathBuf;

use thiserror::Error;

use crate::well::PropertyKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid well: {0}")]
    InvalidWell(String),

    #[error("depth {depth} m is outside the logged range [{start}, {stop}]")]
    DepthOutOfRange { depth: f64, start: f64, stop: f64 },

    #[error("unsupported depth unit {0:?}")]
    UnsupportedUnit(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("width mismatch: expected {expected} features, got {actual}")]
    WidthMismatch { expected: usize, actual: usize },

    #[error("length mismatch: {left} truth values vs {right} predictions")]
    LengthMismatch { left: usize, right: usize },

    #[error("MAPE undefined: every truth value has magnitude <= 1e-12")]
    UndefinedMape,

    #[error("infeasible gap injection in {well}: {reason}")]
    InfeasibleInjection { well: String, reason: String },

    #[error("incomplete restoration: {missing} blanked cells have no ground truth (first: row {row}, {property})")]
    IncompleteRestoration {
        missing: usize,
        row: usize,
        property: PropertyKind,
    },

    #[error("no eligible rows for target {0}")]
    EmptyDataset(PropertyKind),

    #[error("linear system is singular even with ridge regularization")]
    SingularSystem,

    #[error("training diverged at epoch {epoch} (learning rate {learning_rate}): loss is not finite")]
    Diverged { epoch: usize, learning_rate: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("missing coordinates for wells: {}", .0.join(", "))]
    MissingCoordinates(Vec<String>),

    #[error("training rows overlap test rows in {well} (first overlapping row {row})")]
    Leak { well: String, row: usize },

    #[error("unknown well {0:?}")]
    UnknownWell(String),

    #[error("model format: {0}")]
    ModelFormat(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
