use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("negative density value {value} at index {idx}")]
    NegativeDensity { idx: usize, value: f64 },

    #[error("non-finite value {value} at index {idx}")]
    NonFinite { idx: usize, value: f64 },

    #[error("truncation: {0}")]
    Truncation(String),

    #[error("grid spacing mismatch: {0} vs {1}")]
    SpacingMismatch(f64, f64),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("kernel transcription inconsistency: J1 - J2 = {j1_minus_j2}, merged J = {combined}")]
    KernelInconsistency { j1_minus_j2: f64, combined: f64 },

    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("no feasible perturbation scale: {0}")]
    Infeasible(String),

    #[error("moment generating function bound violated at t = {t}: ln E e^(tX) = {log_mgf} > 16 t^2 = {bound}")]
    MgfBound { t: f64, log_mgf: f64, bound: f64 },

    #[error("degenerate sample batch: {0}")]
    DegenerateBatch(String),

    #[error("unknown sampler kind: {0}")]
    UnknownSampler(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
