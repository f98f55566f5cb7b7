use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("site-count mismatch: {left} vs {right}")]
    SiteMismatch { left: usize, right: usize },

    #[error("dense evaluation on {n_sites} sites exceeds the dense cap of {cap}")]
    DenseCapExceeded { n_sites: usize, cap: usize },

    #[error("operator is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("invalid Pauli label {0:?}")]
    InvalidPauli(String),

    #[error("schema violation: {0}")]
    Schema(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported product-formula order {0} (expected 1, 2, 4 or 6)")]
    UnsupportedOrder(usize),

    #[error("BCH order {q} exceeds q_max = {q_max}")]
    OrderTooHigh { q: usize, q_max: usize },

    #[error("nested-commutator budget exceeded: {needed} evaluations > {budget}; use one-norm mode or a smaller q")]
    BudgetExceeded { needed: u128, budget: u128 },

    #[error("matrix logarithm at tau = {tau} has eigenphase {phase:.4} too close to the branch cut")]
    LogBranch { tau: f64, phase: f64 },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
