//! Error type shared by every module of the crate.

use thiserror::Error;

/// Crate-wide error enumeration.
#[derive(Debug, Error)]
pub enum Error {
    /// A tensor product would exceed the configured composite-dimension cap.
    #[error("dimension {requested} exceeds the configured limit {limit}")]
    DimensionLimit { requested: usize, limit: usize },

    /// Matrix or wire shapes do not line up.
    #[error("shape error: {0}")]
    ShapeError(String),

    /// An iterative numerical routine failed to converge.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// A map failed the complete-positivity / trace-non-increase checks.
    #[error("not CPTNI: {0}")]
    NotCptni(String),

    /// Sequential or labeled composition attempted between incompatible wires.
    #[error("wire mismatch: {0}")]
    WireMismatch(String),

    /// A claimed orthonormal basis is not unitary.
    #[error("bad basis: {0}")]
    BadBasis(String),

    /// Block indices fail to partition the basis index set.
    #[error("bad partition: {0}")]
    BadPartition(String),

    /// A group representation failed unitarity or closure validation.
    #[error("bad representation: {0}")]
    BadRepresentation(String),

    /// A decoherence mechanism failed validation.
    #[error("bad mechanism: {0}")]
    BadMechanism(String),

    /// The decoherence family does not cover a system the operation needs.
    #[error("missing assignment: {0}")]
    MissingAssignment(String),

    /// A process on a classical wire does not commute with basis dephasing there.
    #[error("classical wire violation: {0}")]
    ClassicalWire(String),

    /// A candidate decoherence process failed the causal+idempotent validation.
    #[error("invalid decoherence process: {0}")]
    InvalidDecoherence(String),

    /// A free-set specification is internally inconsistent.
    #[error("bad free-set spec: {0}")]
    BadSpec(String),

    /// A property suite refused to run because its stated precondition failed.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// Invalid tolerance or solver configuration.
    #[error("bad config: {0}")]
    BadConfig(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
