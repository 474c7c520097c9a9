use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid quarter fraction {p}/(4*{q}): {reason}")]
    InvalidQuarterFraction { p: u64, q: u64, reason: &'static str },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("coin at site {site} is not unitary (deviation {deviation:e})")]
    NonUnitaryCoin { site: i64, deviation: f64 },

    #[error("norm drifted by {deviation:e} after step {step}")]
    NumericalDrift { step: u64, deviation: f64 },

    #[error("no site has probability above {threshold:e}")]
    EmptySupport { threshold: f64 },

    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),

    #[error("input is an exact rational; approximants require an irrational value")]
    RationalInput,

    #[error("no certified quarter approximant with Q <= {q_max}")]
    NoneFound { q_max: u64 },

    #[error("enclosure too wide to decide the bound for Q = {q}")]
    Indecisive { q: u64 },

    #[error("eigensolver failed for {context}: {reason}")]
    Convergence { context: String, reason: String },

    #[error("probability {probability:e} leaked to site {site} outside [-{q}, {q}]")]
    Leakage { site: i64, q: u64, probability: f64 },
}

impl Error {
    pub(crate) fn convergence(context: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Convergence {
            context: context.into(),
            reason: reason.into(),
        }
    }
}
