use thiserror::Error;

use crate::model::JobId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("precedence edges contain a cycle through job {0}")]
    Cycle(JobId),

    #[error("job {job} out of range for an instance with {n} jobs")]
    Index { job: usize, n: usize },

    #[error("machine count must be at least 1")]
    BadMachineCount,

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("instance has {n} jobs, exact search is capped at {cap}")]
    TooLarge { n: usize, cap: usize },

    #[error("exact search exhausted its budget of {0} states")]
    BudgetExhausted(usize),

    #[error("horizon {0} is not a power of two")]
    BadHorizon(usize),

    #[error("bad eps: {0}")]
    BadEps(String),

    #[error("empty feasible window for job {job}: [{lo}, {hi})")]
    EmptyWindow { job: JobId, lo: usize, hi: usize },

    #[error("no insertion slot for discarded job {0}")]
    NoSlot(JobId),

    #[error("horizon {0} admits no schedule")]
    InfeasibleHorizon(usize),

    #[error("bad generator spec: {0}")]
    BadSpec(String),

    #[error("bad priority order: {0}")]
    BadOrder(String),

    #[error("audit precondition unmet: {0}")]
    PreconditionUnmet(String),

    #[error("{path}: {msg}")]
    Io { path: String, msg: String },
}
