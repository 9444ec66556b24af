use thiserror::Error;

use crate::expr::{EvalError, ParseError};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("metric of chart `{chart}` is singular (|det| = {det:e})")]
    SingularMetric { chart: String, det: f64 },
    #[error("coordinate `{0}` is not part of the chart")]
    UnknownCoordinate(String),
    #[error("coordinate `{0}` is declared by both factors")]
    CoordinateCollision(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("warping function `{name}` is not positive ({value})")]
    NonPositiveWarping { name: String, value: f64 },
    #[error("sampling failed: {0}")]
    Sampling(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
}
