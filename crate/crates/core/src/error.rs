use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown corpus primitive `{0}`")]
    UnknownPrimitive(String),
    #[error("non-finite value at t = {t}")]
    NonFinite { t: f64 },
    #[error("paths are not sampled on the same grid")]
    GridMismatch,
    #[error("window of length {available} is shorter than the required {required}")]
    WindowTooShort { required: f64, available: f64 },
    #[error("{what} lies outside the sampled window")]
    OutOfRange { what: String },
    #[error("no overlap left for shift {tau}")]
    EmptyComparisonWindow { tau: f64 },
    #[error("weight measure has no mass on [-{r}, {r}]")]
    ZeroMass { r: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("semigroup applied at negative time {0}")]
    NegativeTime(f64),
    #[error("Picard iteration did not converge after {iterations} iterations (last sup mean square {last:e})")]
    NoConvergence { iterations: usize, last: f64 },
    #[error("exponent p = {0} is outside the admissible range")]
    InvalidExponent(f64),
    #[error("time {0} is not a grid node")]
    OffGrid(f64),
    #[error("exact assignment limited to {limit} samples, got {got}")]
    TooManySamplesForExact { limit: usize, got: usize },
    #[error("bounded-Lipschitz LP limited to {limit} pooled samples, got {got}")]
    TooManySamples { limit: usize, got: usize },
    #[error("shift {tau} leaves no overlapping grid times")]
    EmptyOverlap { tau: f64 },
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for failures caused by floating point blow-up rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonFinite { .. } | Error::NoConvergence { .. })
    }
}
