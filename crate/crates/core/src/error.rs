use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("objects of different kinds cannot be compared")]
    MixedKinds,

    #[error("source id {id} out of range for {n} objects")]
    InvalidSource { id: usize, n: usize },

    #[error("source set is empty")]
    EmptySources,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("explicit graph refused: {n} objects exceeds cap {cap}")]
    CapExceeded { n: usize, cap: usize },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
