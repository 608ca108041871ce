use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// Inputs the theory leaves undefined, such as genus one with no points.
    #[error("undefined: {0}")]
    Undefined(String),
    #[error("inconsistent values for {key}: {first} vs {second}")]
    Inconsistent { key: String, first: String, second: String },
    #[error("strategy {strategy} does not apply to {key}")]
    NotApplicable { strategy: String, key: String },
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
}
