use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter outside admissible domain: {0}")]
    Domain(String),
    #[error("model evaluation produced non-finite values: {0}")]
    Eval(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("rank failure: {0}")]
    Rank(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("unknown random variable `{0}`")]
    UnknownVariable(String),
    #[error("unknown model `{0}`")]
    UnknownModel(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("data error: {0}")]
    Data(String),
}

pub type Result<T> = std::result::Result<T, Error>;
