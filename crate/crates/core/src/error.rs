use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid delay specification: {0}")]
    InvalidDelay(String),
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("no path from node {origin} to node {dest}")]
    NoPath { origin: u32, dest: u32 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid route: {0}")]
    InvalidRoute(String),
    #[error("{path}: {reason}")]
    Schema { path: String, reason: String },
    #[error("trip {trip}: {reason}")]
    InvalidTrip { trip: u32, reason: String },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("schedule update exceeded its budget of {budget} label evaluations")]
    BudgetExceeded { budget: usize },
    #[error("refusing exhaustive search over {combinations} combinations (limit {limit})")]
    OracleBudget { combinations: u128, limit: u128 },
    #[error("instance generation failed: {0}")]
    Generation(String),
}
