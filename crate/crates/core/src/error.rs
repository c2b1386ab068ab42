use thiserror::Error;

/// Errors raised by oracles, profiles and constructions.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DensityError {
    /// An oracle returned answers that contradict its own contract.
    #[error("oracle integrity violation: {0}")]
    Integrity(String),

    /// A query went past the declared horizon of an oracle.
    #[error("horizon exceeded: query {requested} is not below horizon {horizon}")]
    Horizon { requested: u64, horizon: u64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    /// `A ⊆ B` failed on the swept prefix.
    #[error("containment violated: {witness} is in A but not in B")]
    Containment { witness: u64 },

    #[error("degenerate checkpoint {checkpoint}: reference set has no elements below it")]
    DegenerateCheckpoint { checkpoint: u64 },

    /// Finite evidence cannot settle the question.
    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("resource limit: {0}")]
    Resource(String),
}

impl DensityError {
    pub fn horizon(requested: u64, horizon: u64) -> Self {
        DensityError::Horizon { requested, horizon }
    }

    /// True for errors that the CLI maps to the horizon/resource exit code.
    pub fn is_horizon_or_resource(&self) -> bool {
        matches!(self, DensityError::Horizon { .. } | DensityError::Resource(_))
    }
}

pub type Result<T> = std::result::Result<T, DensityError>;
