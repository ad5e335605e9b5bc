use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mu4 must be positive, got {0}")]
    NonPositiveViscosity(f64),
    #[error("coefficient {name} must be non-negative, got {value}")]
    NegativeCoefficient { name: &'static str, value: f64 },
    #[error("Parodi relation violated: |(mu2 + mu3) - (mu6 - mu5)| = {residual:e} > {tol:e}")]
    ParodiViolation { residual: f64, tol: f64 },
    #[error("rho1 must be positive, got {0}")]
    NonPositiveInertia(f64),
    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),
    #[error("initial energy must be positive, got {0}")]
    NonPositiveEnergy(f64),
    #[error("energy cap diverged: Y * exp(4 C2 T) = {0} >= 1")]
    CapDiverged(f64),
    #[error("constant {name} must be positive, got {value}")]
    InvalidConstant { name: &'static str, value: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("component mismatch: expected {expected} components, found {found}")]
    ComponentMismatch { expected: usize, found: usize },
    #[error("invalid Sobolev order {0}")]
    InvalidOrder(usize),
    #[error("cutoff mismatch: {0}")]
    CutoffMismatch(String),

    #[error("time step {dt} exceeds the stability bound {bound}")]
    StabilityViolation { dt: f64, bound: f64 },
    #[error("non-finite value detected at t = {t}")]
    NanDetected { t: f64 },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("director sample {index} has zero length and cannot be normalized")]
    NormalizationFailed { index: usize },

    #[error("invalid configuration field `{field}`: {message}")]
    ConfigInvalid { field: String, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("format error: {0}")]
    FormatVersionMismatch(String),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::ConfigInvalid {
            field: field.into(),
            message: message.into(),
        }
    }
}
