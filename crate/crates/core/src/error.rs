use std::io;

use thiserror::Error;

/// Errors surfaced by the library. Each variant maps onto one CLI exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("modulus {n} exceeds the bit-set capacity of {capacity}")]
    Capacity { n: u64, capacity: u64 },

    #[error("integer overflow in lattice arithmetic")]
    Overflow,

    #[error("instantiation failed: {0}")]
    InstantiationFailed(String),

    #[error("audit failure: {0}")]
    Audit(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("search interrupted; {completed} of {total} shards complete")]
    Interrupted { completed: usize, total: usize },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
