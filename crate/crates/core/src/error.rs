use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SledError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric: |a[{i}][{j}] - a[{j}][{i}]| = {gap:e}")]
    NotSymmetric { i: usize, j: usize, gap: f64 },

    #[error("non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("invalid sparsity budget: {0}")]
    InvalidBudget(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("feature {0} has zero variance")]
    DegenerateFeature(usize),

    #[error("entry ({i}, {j}) has zero estimated variance in both groups")]
    DegenerateVariance { i: usize, j: usize },

    #[error("exhaustive search too large: p = {p}, R = {r} ({supports} supports)")]
    InstanceTooLarge { p: usize, r: usize, supports: u128 },

    #[error("solver did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },

    #[error("{path}:{line}: expected {expected} cells, found {found}")]
    RaggedRows { path: PathBuf, line: usize, expected: usize, found: usize },

    #[error("{path}:{line}:{column}: cell {cell:?} is not a finite number")]
    NonNumericCell { path: PathBuf, line: usize, column: usize, cell: String },

    #[error("{path}: invalid JSON: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl SledError {
    /// True for errors caused by bad arguments rather than bad data.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            SledError::DimensionMismatch { .. }
                | SledError::InvalidBudget(_)
                | SledError::InvalidParameter(_)
                | SledError::InstanceTooLarge { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, SledError>;
