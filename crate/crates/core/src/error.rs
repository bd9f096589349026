use thiserror::Error;

/// Errors raised by the harvest model and its analyses.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarvestError {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("history has {got} entries but the delay requires {expected}")]
    HistoryLength { expected: usize, got: usize },

    #[error("orbit is empty")]
    EmptyOrbit,

    #[error("no positive equilibrium: rT = {rt} <= -ln(1 - E) = {threshold}")]
    NoEquilibrium { rt: f64, threshold: f64 },

    #[error("no root of sin(k t)/sin((k+1) t) = 1/p0 in (0, pi/(k+1)) for p0 = {p0}, k = {k}")]
    NoRoot { p0: f64, k: usize },

    #[error("bisection did not reach tolerance {tol} after {iterations} iterations")]
    ConvergenceFailure { tol: f64, iterations: usize },

    #[error("bisection endpoints do not bracket the boundary: {reason}")]
    NonBracketing { reason: String },

    /// Output could not be written; the message of the underlying error.
    #[error("write failed: {0}")]
    Write(String),
}

impl From<std::io::Error> for HarvestError {
    fn from(e: std::io::Error) -> Self {
        HarvestError::Write(e.to_string())
    }
}

impl From<csv::Error> for HarvestError {
    fn from(e: csv::Error) -> Self {
        HarvestError::Write(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, HarvestError>;

pub(crate) fn require(ok: bool, name: &'static str, value: f64, reason: &'static str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(HarvestError::InvalidParameter { name, value, reason })
    }
}
