use thiserror::Error;

use crate::grid::ScalarField;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid shape: {0}")]
    InvalidSpec(String),

    #[error("feature of width {width} is thinner than 3 cells at spacing {h}")]
    FeatureTooThin { width: f64, h: f64 },

    #[error("invalid grid domain: {0}")]
    InvalidDomain(String),

    #[error("operation not supported in dimension {0}")]
    DimensionUnsupported(usize),

    #[error("trial function vanishes identically")]
    ZeroTrialFunction,

    #[error("exponent p = {0} outside the admissible range")]
    InvalidExponent(f64),

    #[error("exponent p = {p} must be below the dimension n = {n}")]
    ExponentOutOfRange { p: f64, n: usize },

    #[error("p = n = {0}: conformal capacity has no power-law ball formula")]
    ConformalCase(usize),

    #[error("no convergence after {iterations} iterations (last relative change {residual:e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        last: Option<Box<ScalarField>>,
    },

    #[error("every sampled superlevel set is empty")]
    EmptySuperlevel,

    #[error("set is empty")]
    EmptySet,

    #[error("field has no sign change inside the domain")]
    NoSignChange,

    #[error("no ball of radius {0} fits inside the domain")]
    NoInteriorBall(f64),

    #[error("shape has no reflection symmetry across a coordinate axis")]
    NotSymmetric,

    #[error("{0}")]
    DomainError(String),

    #[error("precondition for {id} violated: {reason}")]
    PreconditionViolated { id: String, reason: String },

    #[error("missing parameter `{0}`")]
    MissingParam(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("config parse error: {0}")]
    ConfigParse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
