use thiserror::Error;

/// Errors produced by the offloading library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("network generation failed for seed {seed}: master did not reach every node after {attempts} attempts")]
    Generation { seed: u64, attempts: usize },

    #[error("nodes unreachable from the master: {0:?}")]
    Unreachable(Vec<usize>),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("infeasible problem: {0}")]
    Infeasible(String),

    #[error("invalid scenario: {}", .0.join("; "))]
    Scenario(Vec<String>),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
