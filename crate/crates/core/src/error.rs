use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {left} vs {right}")]
    DimensionMismatch {
        op: &'static str,
        left: String,
        right: String,
    },

    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("matrix is singular or not positive definite (pivot {pivot} at index {index}, tolerance {tolerance:e})")]
    Singular {
        index: usize,
        pivot: f64,
        tolerance: f64,
    },

    #[error("matrix is not symmetric: |a[{row}][{col}] - a[{col}][{row}]| = {diff:e}")]
    NotSymmetric { row: usize, col: usize, diff: f64 },

    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),

    #[error("label domain error: {0}")]
    LabelDomain(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: u64,
        msg: String,
    },

    #[error("invalid stream plan: {0}")]
    InfeasiblePlan(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("model file {path}: {msg}")]
    ModelFormat { path: PathBuf, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn shape(op: &'static str, left: (usize, usize), right: (usize, usize)) -> Self {
        Error::DimensionMismatch {
            op,
            left: format!("{}x{}", left.0, left.1),
            right: format!("{}x{}", right.0, right.1),
        }
    }

    /// Process exit code used by the command-line tool: 1 usage, 2 data, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::Singular { .. }
            | Error::NotSymmetric { .. }
            | Error::NumericalBreakdown(_)
            | Error::NonFinite(_) => 3,
            Error::DimensionMismatch { .. }
            | Error::InvalidDimension(_)
            | Error::LabelDomain(_)
            | Error::Parse { .. }
            | Error::InfeasiblePlan(_)
            | Error::ModelFormat { .. }
            | Error::Io(_) => 2,
        }
    }
}
