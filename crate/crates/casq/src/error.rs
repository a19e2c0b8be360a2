//! Error types shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("operation requires region kind {expected}, got {got}")]
    KindMismatch { expected: &'static str, got: &'static str },

    #[error("requested an empty sample (count = 0)")]
    EmptySample,

    #[error("coincident points: kernel is singular at zero separation")]
    SingularSeparation,

    #[error("resonance ω = kc with eta = 0: Green's function is singular")]
    ResonanceSingularity,

    #[error("point lies below the reflecting plane z = 0")]
    InvalidHalfSpace,

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("observation point r_a lies outside the integration region")]
    OutsideRegion,

    #[error("no stationary point of the boundary phase was found")]
    SaddleNotFound,

    #[error("stationary phase is degenerate (S'' vanishes or S is constant)")]
    DegenerateSaddle,

    #[error("operation needs at least {needed} molecules, cloud has {got}")]
    InsufficientBodies { needed: usize, got: usize },

    #[error("response model undefined at the requested arguments: {0}")]
    ResponseDomainError(String),

    #[error("engine {engine} is incompatible with the supplied sample ({sample})")]
    EngineMismatch { engine: &'static str, sample: &'static str },

    #[error("phase analysis needs a nonzero direct reference")]
    DegenerateReference,

    #[error("config error at `{path}`: {msg}")]
    ConfigError { path: String, msg: String },

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::ConfigError { path: path.into(), msg: msg.into() }
    }
}
