use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("trace deviates from one by {deviation:.3e}")]
    TraceNotOne { deviation: f64 },

    #[error("matrix is not positive semidefinite (minimum eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("operator is not unitary (max deviation of U^dag U from identity {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("map is not completely positive: Choi eigenvalue {eigenvalue:.3e}")]
    NotCompletelyPositive { eigenvalue: f64 },

    #[error("map is not trace preserving (deviation {deviation:.3e})")]
    NotTracePreserving { deviation: f64 },

    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("joint dimension {required} exceeds the configured cap of {cap}")]
    ResourceLimit { required: String, cap: usize },

    #[error("grid spacing {dt:.3e} exceeds the resolution limit {max_dt:.3e} ({reason})")]
    GridResolution { dt: f64, max_dt: f64, reason: String },

    #[error("generator at t = 0 deviates from the identity map by {deviation:.3e}")]
    NonIdentityInitialMap { deviation: f64 },

    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("series truncation bound not reached within {cap} terms")]
    TruncationCap { cap: usize },

    #[error("state pair {0} consists of identical states")]
    IdenticalStatePair(usize),

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("singular linear system in {0}")]
    Singular(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
