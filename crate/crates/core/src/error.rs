use thiserror::Error;

/// Errors produced while building or simulating a search instance.
#[derive(Debug, Error)]
pub enum WalkError {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The instance violates a standing precondition such as `n >= 2k`.
    #[error("invalid instance: {0}")]
    Precondition(String),

    /// The smallest eigenvalue equals `-d` and the eigenbasis is undefined.
    #[error("degenerate instance J({n},{k}): smallest adjacency eigenvalue equals -d")]
    Degenerate { n: usize, k: usize },

    /// The instance is too large for the requested engine or oracle.
    #[error("capacity exceeded: {what} needs {required} but the limit is {limit}")]
    Capacity {
        what: &'static str,
        required: u128,
        limit: u128,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A brute-force certification check exceeded its tolerance.
    #[error("certification failed: {0}")]
    Certification(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, WalkError>;
