use thiserror::Error;

use crate::states::ModeId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("mode registries differ")]
    RegistryMismatch,
    #[error("mode {0} appears more than once in the registry")]
    DuplicateMode(ModeId),
    #[error("mode {0} is not in the registry")]
    UnknownMode(ModeId),
    #[error("mode {0} has the wrong kind for this operation")]
    WrongModeKind(ModeId),
    #[error("term shape does not match the registry")]
    TermShape,
    #[error("state has zero norm")]
    ZeroState,
    #[error("nothing was heralded (zero trace)")]
    NothingHeralded,
    #[error("environment mode {0} is not in the vacuum")]
    NonVacuumEnvironment(ModeId),
    #[error("transmission {0} outside [0, 1]")]
    TransmissionOutOfRange(f64),
    #[error("beam splitter needs two distinct modes, got {0} twice")]
    SameMode(ModeId),
    #[error("trace must keep exactly the two DV modes and drop every CV mode")]
    TraceModes,
    #[error("invalid homodyne window: {0}")]
    InvalidWindow(String),
    #[error("quadrature node count {0} outside [2, 4096]")]
    NodeCount(usize),
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("Fock truncation n_max={n_max} too small for amplitude |beta|={beta}")]
    Truncation { n_max: usize, beta: f64 },
    #[error("Fock dimensions do not match")]
    FockDimension,
    #[error("numerical invariant violated: {0}")]
    Invariant(String),
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
