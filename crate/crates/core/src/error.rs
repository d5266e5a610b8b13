use thiserror::Error;

/// Errors raised anywhere in the parse → translate → combine → check pipeline.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at {line}:{col}: expected {expected}")]
    Syntax {
        line: usize,
        col: usize,
        expected: String,
    },
    #[error("undeclared identifier `{0}`")]
    Scope(String),
    #[error("unsupported Z construct: {0}")]
    Unsupported(String),
    #[error("retrieve relation mentions decorated variable `{0}`")]
    PrimedInRetrieve(String),
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("capacity exceeded: {what} has {size} values (cap {cap})")]
    CapacityExceeded { what: String, size: u128, cap: u128 },
    #[error("free-type inverse applied to the wrong branch: {0}")]
    WrongBranch(String),
    #[error("conflicting override: {0}")]
    ConflictingOverride(String),
    #[error("type clash between specifications: {0}")]
    TypeClash(String),
    #[error("ill-formed specification: {0}")]
    InvalidSpec(String),
    #[error("operation pairing: {0}")]
    Pairing(String),
    #[error("{0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
