use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("weights must be weakly decreasing")]
    NotDecreasing,
    #[error("weight has length {got}, expected rank {rank}")]
    RankMismatch { rank: usize, got: usize },
    #[error("rank must be at least 1")]
    ZeroRank,
    #[error("representation dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: u128, cap: usize },
    #[error("quantum space dimension {dim} exceeds cap {cap}")]
    QuantumCap { dim: u128, cap: usize },
    #[error("chain needs at least one site")]
    EmptyChain,
    #[error("hbar must be non-zero")]
    ZeroHbar,
    #[error("spectral parameter {0} hits a pole")]
    Pole(String),
    #[error("index {what} = {value} out of range")]
    OutOfRange { what: &'static str, value: usize },
    #[error("matrix inverse at {0} is ill-conditioned")]
    Singular(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
