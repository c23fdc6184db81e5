//! On-chip vertex memory and off-chip edge channel.
//!
//! Vertex data lives in `P` single-ported banks selected by the low bits of
//! the vertex ID. A read unit turns each edge batch into per-bank requests,
//! either one batch at a time (blocking) or by letting later batches fill
//! idle ports (out of order). A token-indexed reorder buffer puts returned
//! data back into request order.

mod banked;
mod dram;
mod read_unit;
mod reorder;

pub use banked::{BankedMemory, ReadRequest, ReadResponse};
pub use dram::{fetch_edges, DramChannel, EdgeLine, CACHELINE_BITS};
pub use read_unit::{issue_batches, IssueTrace, ReadBatch, SourceReadUnit};
pub use reorder::{reorder_release, ReleasedBatch, ReorderBuffer, MAX_LANES};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MemoryError {
    #[error("bank count must be a power of two, got {0}")]
    BadBankCount(usize),
    #[error("bank queue depth must be at least 1")]
    ZeroQueueDepth,
    #[error("request queue of bank {bank} is full")]
    QueueFull { bank: usize },
    #[error("write port of bank {bank} already used this cycle")]
    WritePortBusy { bank: usize },
    #[error("reorder buffer capacity must be a power of two, got {0}")]
    BadReorderCapacity(usize),
    #[error("lane count must be between 1 and {max}, got {0}", max = MAX_LANES)]
    BadLaneCount(usize),
    #[error("reorder slot {token} is held by an incomplete older batch")]
    TokenBusy { token: usize },
    #[error("cacheline address {address} is outside the {edges}-edge array")]
    AddressOutOfRange { address: u64, edges: u64 },
    #[error("cacheline address {0} is not line aligned")]
    Unaligned(u64),
}

/// How the read unit hands batches to the banks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MemoryMode {
    /// A batch is issued only after the previous one has been fully served.
    #[default]
    Blocking,
    /// Each bank serves its own queue regardless of batch boundaries.
    OutOfOrder,
}
