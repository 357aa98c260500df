use thiserror::Error;

/// Errors raised by the hedging engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate gaussian law: {0}")]
    DegenerateLaw(String),

    #[error("degenerate conditioning: observed block covariance is singular")]
    DegenerateConditioning,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid correlation {rho}: require |rho| <= 0.9999")]
    InvalidCorrelation { rho: f64 },

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("custom payoff returned {value} at (s1={s1}, s2={s2}); payoffs must be finite and nonnegative")]
    PayoffContract { s1: f64, s2: f64, value: f64 },

    #[error("no closed-form representation for {0} payoffs; use the Monte Carlo estimator")]
    UnsupportedClosedForm(&'static str),

    #[error("closed form for {payoff} requires {condition}; route to the Monte Carlo estimator")]
    AssumptionViolated {
        payoff: &'static str,
        condition: String,
    },

    #[error("payoff is not integrable to tolerance: truncated tail carries {relative_tail:e} of the price")]
    HeavyTail { relative_tail: f64 },

    #[error("target {target} outside attainable range [{lo}, {hi}]")]
    OutOfRange { target: f64, lo: f64, hi: f64 },

    #[error("inversion infeasible: {0}")]
    InfeasibleInversion(String),

    #[error("non-finite integrand value on path {path}")]
    NonFiniteSample { path: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field,
        reason: reason.into(),
    }
}
