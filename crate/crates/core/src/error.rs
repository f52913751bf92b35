use thiserror::Error;

use crate::model::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {}", join(.0))]
    InvalidModel(Vec<Violation>),

    /// A value lies outside its variable's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Arguments are well-formed individually but do not fit together.
    #[error("{0}")]
    Misuse(String),

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded")]
    Unbounded,

    /// Constraint generation hit its iteration cap; `weights` is the last LP solution.
    #[error("iteration budget of {iterations} exhausted (max violation {max_violation:.3e})")]
    BudgetExceeded {
        iterations: usize,
        max_violation: f64,
        weights: Vec<f64>,
        objective: f64,
    },

    /// A computation would exceed a fixed size limit.
    #[error("size budget exceeded: {0}")]
    TooLarge(String),

    /// The LP engine stalled or lost precision.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn join(v: &[Violation]) -> String {
    v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}
