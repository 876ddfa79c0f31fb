use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LaxError {
    #[error("pole at evaluation point: {0}")]
    PoleAtEvaluationPoint(String),
    #[error("singular operator: constant part is not invertible")]
    SingularOperator,
    #[error("jet algebras differ")]
    AlgebraMismatch,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid legs: {0}")]
    InvalidLegs(String),
    #[error("jet order too small: {0}")]
    JetOrder(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("did not converge: {0}")]
    NoConvergence(String),
}

pub type Result<T> = std::result::Result<T, LaxError>;
