use thiserror::Error;

use crate::network::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the simulator can report.
///
/// Variants are grouped by the layer that raises them; protocol code forwards
/// lower-layer errors unchanged.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("address error: {0}")]
    Address(String),

    #[error("validation error: {0}")]
    Validation(String),

    /// A forced measurement outcome has (numerically) zero probability.
    #[error(
        "impossible branch: outcome {outcome} on qubit {qubit} has probability {probability:e}"
    )]
    ImpossibleBranch {
        qubit: usize,
        outcome: u8,
        probability: f64,
    },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("locality violation: operation spans nodes {0} and {1}")]
    Locality(NodeId, NodeId),

    #[error("pool error: {0}")]
    Pool(String),

    #[error("capacity error: {0}")]
    Capacity(String),

    /// A classical bit was used on a node that never measured or received it.
    #[error("causality error: {0}")]
    Causality(String),

    #[error("invalid entanglement: {0}")]
    InvalidEntanglement(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("resource error: {0}")]
    Resource(String),

    #[error("parallel branches touch the same qubit {0}")]
    NotDisjoint(usize),

    #[error("cannot reset: {0}")]
    CannotReset(String),
}
