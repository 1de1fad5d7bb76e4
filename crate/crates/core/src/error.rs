use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed CSV at row {row}: {message}")]
    Csv { row: usize, message: String },

    #[error("row {row} has {found} columns, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("row {row}, column {column}: cannot parse {cell:?} as a finite real")]
    BadCell {
        row: usize,
        column: usize,
        cell: String,
    },

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("k = {k} out of range for {n} observations (need {min} <= k <= n)")]
    KOutOfRange { k: usize, n: usize, min: usize },

    #[error("could not form {k} non-empty clusters after {restarts} restarts")]
    EmptyClusters { k: usize, restarts: usize },

    #[error("degenerate distances: every distance in both samples is zero")]
    DegenerateDistances,

    #[error("degenerate table: fewer than two non-empty categories")]
    DegenerateTable,

    #[error("no testable observations: every observation sits in a singleton cluster")]
    NoTestableObservations,

    #[error("partition length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("infeasible moments: skewness {skew}, excess kurtosis {excess_kurtosis}")]
    InfeasibleMoments { skew: f64, excess_kurtosis: f64 },

    #[error("solver did not converge: {0}")]
    NoConvergence(String),

    #[error("correlation matrix is not positive definite")]
    NotPositiveDefinite,
}
