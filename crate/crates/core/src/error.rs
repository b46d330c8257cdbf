use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {dim}: {reason}")]
    InvalidDimension { dim: usize, reason: &'static str },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("diagonalization of a {dim}x{dim} {kind} matrix did not converge")]
    Diagonalization { dim: usize, kind: &'static str },

    #[error("unfolding failed: {0}")]
    Unfolding(String),

    #[error("normal matrix is rank deficient (parameter {parameter} is not identifiable)")]
    RankDeficient { parameter: usize },

    #[error("artifact is missing statistics: {0}")]
    MissingStatistics(String),

    #[error(
        "resource estimate exceeds budget: {estimate_flops:.3e} flops and {estimate_memory_bytes:.3e} bytes \
         requested, {budget_flops:.3e} flops and {budget_memory_bytes:.3e} bytes allowed"
    )]
    ResourceRefused {
        estimate_flops: f64,
        budget_flops: f64,
        estimate_memory_bytes: f64,
        budget_memory_bytes: f64,
    },

    #[error("realization {realization} failed twice: {message}")]
    RealizationFailed { realization: u64, message: String },

    #[error("cannot parse {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
