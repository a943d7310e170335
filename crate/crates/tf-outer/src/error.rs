use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("geometry invariant violated: {0}")]
    Geometry(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("construction failed: {0}")]
    Construction(String),
    #[error("grid mismatch: {0}")]
    Grid(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("iteration cap reached: {0}")]
    NonTermination(String),
}

pub type Result<T> = std::result::Result<T, Error>;
