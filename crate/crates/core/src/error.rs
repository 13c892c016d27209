use thiserror::Error;

/// Errors produced by games, searches and the analytical models.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("illegal action {action} in state at ply {ply}")]
    IllegalAction { action: usize, ply: u32 },

    #[error("state is not terminal")]
    NotTerminal,

    #[error("state is terminal")]
    TerminalState,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid tree spec: {0}")]
    InvalidSpec(String),

    #[error("path has length {got}, expected {expected}")]
    WrongPathLength { got: usize, expected: usize },

    #[error("no legal actions to choose from")]
    EmptyActionSet,

    #[error("search tree has not run any iterations")]
    Uninitialized,

    #[error("search root is terminal; nothing left to explore")]
    RootExhausted,

    #[error("game provides no heuristic evaluator")]
    NoHeuristic,

    #[error("convergence trace is empty")]
    EmptyTrace,

    #[error("model fit is underdetermined: {0}")]
    Underdetermined(String),

    #[error("tie probability is zero; the root tie never breaks")]
    DegenerateTie,

    #[error("rankings cover different move sets")]
    MismatchedMoveSets,

    #[error("node budget {budget} is too small for {needed} root moves")]
    BudgetTooSmall { budget: u64, needed: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
