//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance document: {0}")]
    Schema(String),
    #[error("element id {0} out of range (ground size {1})")]
    ElementOutOfRange(usize, usize),
    #[error("preference relation for agent {agent:?} is not a strict partial order: {reason}")]
    BadPreferenceOrder { agent: String, reason: String },
    #[error("direct sum components have overlapping grounds")]
    OverlappingDirectSum,
    #[error("ground sets do not match: {0} vs {1}")]
    GroundMismatch(usize, usize),
    #[error("no common base exists")]
    NoCommonBase,
    #[error("agent {0:?} of element {1} is unassigned in the solution")]
    UnassignedAgent(String, usize),
    #[error("brute-force search space estimate {estimate} exceeds the desk-scale limit {limit} (override with POPOLO_BRUTE_LIMIT)")]
    DeskScaleExceeded { estimate: u128, limit: u128 },
    #[error("operation requires weak rankings but agent {0:?} has general partial-order preferences")]
    PartialOrderUnsupported(String),
    #[error("structurally infeasible: {0}")]
    Infeasible(String),
    #[error("generator error: {0}")]
    Generator(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
