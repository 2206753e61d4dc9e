use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter domain: {0}")]
    Domain(String),
    #[error("{base}^{exponent} is undefined for a negative base and non-integer exponent")]
    UndefinedPower { base: String, exponent: String },
    #[error("division by zero: {0}")]
    DivisionByZero(String),
    #[error("jet of order {have} cannot supply order {needed}")]
    InsufficientOrder { needed: usize, have: usize },
    #[error("singular jet operation: {0}")]
    SingularJet(String),
    #[error("integrand is not integrable at 0: {0}")]
    NotIntegrable(String),
    #[error("no convergence: {0}")]
    Convergence(String),
    #[error("cannot parse {0:?}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
