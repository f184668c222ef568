use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("point not exterior: {re}{im:+}i")]
    NotExterior { re: f64, im: f64 },

    #[error("invalid test function: {0}")]
    InvalidFunction(String),

    #[error("magnitude overflow in term {term} (log-magnitude {log_magnitude:.1})")]
    MagnitudeOverflow { term: usize, log_magnitude: f64 },

    #[error("pole proximity: {re}{im:+}i is within 1e-12 of a pole")]
    PoleProximity { re: f64, im: f64 },

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("norm divergent: {0}")]
    NormDivergent(String),

    #[error("tail divergent: t = {t} but the first nonzero coefficient has index {first_nonzero}")]
    TailDivergent { t: f64, first_nonzero: usize },

    #[error("integral divergent: {0}")]
    IntegralDivergent(String),

    #[error("kernel overflow at r = {r}")]
    KernelOverflow { r: f64 },

    #[error("bracket violation: v'(r) = {x} has no root in [{lo}, {hi}]")]
    BracketViolation { x: f64, lo: f64, hi: f64 },

    #[error("undefined: {0}")]
    Undefined(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error at {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
