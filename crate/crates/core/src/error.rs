//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by model builders, solvers and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    /// A value does not fit the declared bit range.
    #[error("value {value} out of range for bit index bound n={n} (max {max})")]
    Range { value: u128, n: u32, max: u128 },

    /// Sequence lengths do not line up.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Evaluation hit a variable with no assigned value.
    #[error("unbound variable {0}")]
    UnboundVariable(String),

    /// Integer coefficient arithmetic overflowed i128.
    #[error("coefficient arithmetic overflow")]
    Overflow,

    /// The factorization instance violates its own invariants.
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    /// A parameter failed validation.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Exhaustive enumeration refused: too many free variables.
    #[error("resource guard: {vars} free variables exceed limit {limit} ({estimate})")]
    ResourceGuard {
        vars: usize,
        limit: usize,
        estimate: String,
    },

    /// Presolve found the constraint system unsatisfiable.
    #[error("infeasible instance: {0}")]
    Infeasible(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
