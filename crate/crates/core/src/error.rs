use thiserror::Error;

/// Errors raised by the blow-up profile library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("chart conversion undefined: {0}")]
    Chart(String),

    #[error("step size underflow at s={s} with state {state:?}")]
    StepUnderflow { s: f64, state: [f64; 3] },

    #[error("non-finite value in vector field at s={s}")]
    NonFinite { s: f64 },

    #[error("invariant set violated: {0}")]
    InvariantViolation(String),

    #[error("no bracket: {0}")]
    NoBracket(String),

    #[error("tangential crossing invalidates the bracket at parameter {0}")]
    Tangency(f64),

    #[error("orbit entering the line of points at infinity not found: {0}")]
    R0NotFound(String),

    #[error("event {0} absent from trajectory")]
    EventAbsent(String),

    #[error("profile error: {0}")]
    Profile(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// True for errors caused by bad input rather than numerics.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::InvalidParams(_) | Error::Chart(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
