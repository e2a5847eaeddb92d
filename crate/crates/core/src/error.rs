use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Parameter(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("value outside chart domain: {0}")]
    Domain(String),
    #[error("metric singularity: component {index} of the probability vector is zero")]
    Singularity { index: usize },
    #[error("frequency vector touches the simplex boundary at component {index}")]
    Boundary { index: usize },
    #[error("likelihood vanishes on every grid node")]
    DegenerateData,
    #[error("density is positive where the prior vanishes (node {node})")]
    Support { node: usize },
    #[error("normalization violated: {0}")]
    Normalization(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("map is not representable as a unitary or antiunitary transformation: {0}")]
    NotRepresentable(String),
    #[error("sigma changes along the path at step {step}")]
    Discontinuity { step: usize },
    #[error("outcome {outcome} has zero probability")]
    ImpossibleOutcome { outcome: usize },
    #[error("preparation outcome {outcome} is unreachable from the source state")]
    UnreachablePreparation { outcome: usize },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
        if expected == got {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, got })
        }
    }
}
