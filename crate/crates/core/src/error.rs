use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModalError {
    #[error("subsystem name `{0}` appears more than once")]
    NameCollision(String),

    #[error("unknown subsystem `{0}`")]
    UnknownSubsystem(String),

    #[error("subsystem selection is empty")]
    EmptySelection,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("operator is not unitary (residual {0:.3e})")]
    NotUnitary(f64),

    #[error("operator is not Hermitian (residual {0:.3e})")]
    NotHermitian(f64),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("`{0}` is not part of the reference system")]
    NotContained(String),

    /// Joint probabilities are only defined for pairwise disjoint systems.
    #[error("systems overlap on `{0}`; joint probabilities need pairwise disjoint systems")]
    OverlappingSystems(String),

    #[error("branch probability {0:.3e} is too small to condition on")]
    ZeroProbabilityBranch(f64),

    #[error("image {image} of object position {x} lies outside the receptor array")]
    ImageOutsideDetector { x: f64, image: f64 },

    #[error("no probability mass reaches the detector")]
    NoDetectableMass,

    #[error("probability mass {0:.3e} falls outside the detector coverage")]
    MassOutsideDetector(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("elapsed time must be positive")]
    ZeroTime,

    #[error("at least 5 trials are required, got {0}")]
    InsufficientTrials(usize),

    #[error("infeasible dimensions: {0}")]
    Infeasible(String),

    #[error("numerical invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, ModalError>;
