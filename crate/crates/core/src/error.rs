use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("joint dimension {0} exceeds the dense limit of 2^22")]
    DimensionTooLarge(u128),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("empty tensor product")]
    EmptyTensor,

    #[error("operator is not hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("operator is not unitary (max deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),

    #[error("degenerate resource parameter beta={beta} for nonzero alpha={alpha}")]
    DegenerateBeta { alpha: f64, beta: f64 },

    #[error("forced outcome {0} has zero probability")]
    ZeroProbabilityBranch(usize),

    #[error("outcome source exhausted or invalid: {0}")]
    OutcomeSource(String),

    #[error("inconsistent schedule: {0}")]
    InconsistentSchedule(String),

    #[error("angle {angle} outside the supported domain {domain}")]
    AngleOutOfDomain { angle: f64, domain: &'static str },

    #[error("block length {0} too large for exhaustive enumeration (max 22)")]
    BlockTooLong(usize),

    #[error("unsatisfiable resource design: {0}")]
    UnsatisfiableDesign(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid hamiltonian: {0}")]
    Hamiltonian(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
