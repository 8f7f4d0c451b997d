use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },

    #[error("undeclared symbol `{0}`")]
    UndeclaredSymbol(String),

    #[error("symbol `{symbol}` expects {expected} arguments, got {got}")]
    Arity {
        symbol: String,
        expected: usize,
        got: usize,
    },

    #[error("undeclared action `{0}`")]
    UndeclaredAction(String),

    #[error("ill-formed order: {0}")]
    IllFormedOrder(String),

    #[error("rule `{rule}` has free variables: {vars}")]
    FreeVariables { rule: String, vars: String },

    #[error("rule `{0}` is not an ntytt rule")]
    NotNtytt(String),

    #[error("rule `{0}` is not a decent ntyft rule")]
    NotDecentNtyft(String),

    #[error("transition system specification is incomplete: {0} ambiguous literal(s), e.g. {1}")]
    Incomplete(usize, String),

    #[error("term `{0}` escapes the ground universe")]
    UniverseEscape(String),

    #[error("depth bound {0} exceeded")]
    DepthExceeded(usize),

    #[error("cyclic decomposition detected at {0}")]
    Cycle(String),

    #[error("cap {cap} exceeded: {what}")]
    CapExceeded { what: String, cap: usize },

    #[error("state {0} out of range")]
    StateOutOfRange(usize),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("internal consistency failure: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
