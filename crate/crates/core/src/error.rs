use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("grid mismatch: expected {expected} values, found {found}")]
    GridMismatch { expected: usize, found: usize },

    #[error("fractional order {value} at point {index} lies outside [{lower}, {upper}]")]
    OrderOutOfRange { index: usize, value: f64, lower: f64, upper: f64 },

    #[error("Mittag-Leffler series unconverged after {terms} terms (partial value {partial:e})")]
    MlUnconverged { terms: usize, partial: f64 },

    #[error("Mittag-Leffler series lost precision: largest term {largest_term:e} against sum {sum:e}")]
    MlPrecisionLoss { largest_term: f64, sum: f64 },

    #[error("Picard iteration did not reach tolerance in window {window} after {iterations} iterations (last change {last_change:e})")]
    PicardMaxIter { window: usize, iterations: usize, last_change: f64 },

    #[error("local step rejected at t = {time} after {retries} retries without norm growth")]
    StepRejected { time: f64, retries: usize },

    #[error("split point x = 1/2 is not a grid node")]
    SplitNotOnGrid,

    #[error("order field carries no piecewise-constant regions")]
    RegionsAbsent,

    #[error("right-hand side evaluation failed: {0}")]
    Rhs(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
