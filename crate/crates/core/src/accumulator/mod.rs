//! Parallel accumulator: a tag-segmented prefix network that merges
//! conflicting updates of one batch in a single pass, a multiplexer that
//! picks each vertex's result at its last lane, and a crossbar feeding
//! replicated destination accumulators that merge results across batches.

mod crossbar;
mod network;

pub use crossbar::{route_crossbar, CrossbarRouting, DestAccumulator, DestAccumulatorArray, WriteBack};
pub use network::{Node, ScanNetwork};

use std::fmt::Debug;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::VertexId;

/// Tag carried by empty lanes. Never equal to a real vertex ID.
pub const INVALID_TAG: VertexId = VertexId::MAX;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AccumulatorError {
    #[error("network width must be a power of two, got {0}")]
    BadWidth(usize),
    #[error("batch has {got} lanes, network width is {width}")]
    WidthMismatch { got: usize, width: usize },
    #[error("tag {tag} reappears at lane {lane} after a different tag")]
    NonContiguousRun { tag: VertexId, lane: usize },
    #[error("valid lane {lane} follows an empty lane")]
    GapBeforeTail { lane: usize },
    #[error("tags {a} and {b} alias under {bits}-bit compression")]
    TagAliasing { a: VertexId, b: VertexId, bits: u32 },
    #[error("replica count must be a power of two, got {0}")]
    BadReplicaCount(usize),
}

/// Vertex payloads the accumulator can combine.
pub trait Payload: Copy + PartialEq + PartialOrd + Debug + Send + Sync + 'static {
    const ZERO: Self;
    const MAX: Self;
    /// Bytes of on-chip storage per vertex.
    const BYTES: usize;
    fn add(self, other: Self) -> Self;
}

macro_rules! int_payload {
    ($($t:ty),*) => {$(
        impl Payload for $t {
            const ZERO: Self = 0;
            const MAX: Self = <$t>::MAX;
            const BYTES: usize = std::mem::size_of::<$t>();
            fn add(self, other: Self) -> Self {
                self.wrapping_add(other)
            }
        }
    )*};
}
int_payload!(u8, u16, u32, u64, i32, i64);

impl Payload for f32 {
    const ZERO: Self = 0.0;
    const MAX: Self = f32::INFINITY;
    const BYTES: usize = 4;
    fn add(self, other: Self) -> Self {
        self + other
    }
}

impl Payload for f64 {
    const ZERO: Self = 0.0;
    const MAX: Self = f64::INFINITY;
    const BYTES: usize = 8;
    fn add(self, other: Self) -> Self {
        self + other
    }
}

/// The two atomic update flavors: atomic add and CAS-if-less.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CombineOp {
    Add,
    Min,
}

impl CombineOp {
    pub fn identity<T: Payload>(self) -> T {
        match self {
            CombineOp::Add => T::ZERO,
            CombineOp::Min => T::MAX,
        }
    }

    #[inline]
    pub fn apply<T: Payload>(self, a: T, b: T) -> T {
        match self {
            CombineOp::Add => a.add(b),
            CombineOp::Min => {
                if b < a {
                    b
                } else {
                    a
                }
            }
        }
    }
}

/// One accumulator input lane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TaggedValue<T> {
    pub value: T,
    pub tag: VertexId,
    pub valid: bool,
}

impl<T: Payload> TaggedValue<T> {
    pub fn new(value: T, tag: VertexId) -> Self {
        Self { value, tag, valid: true }
    }

    pub fn empty(op: CombineOp) -> Self {
        Self { value: op.identity(), tag: INVALID_TAG, valid: false }
    }
}

/// A destination vertex's merged value for one batch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AccumulatedResult<T> {
    pub tag: VertexId,
    pub value: T,
    /// Lane the multiplexer read from: the last lane of the tag's run.
    pub source_port: usize,
}

/// Checks the input contract: valid lanes form a prefix, and each tag
/// occupies a single contiguous run.
pub fn check_contiguous<T>(batch: &[TaggedValue<T>]) -> Result<(), AccumulatorError> {
    let mut seen: Vec<VertexId> = Vec::new();
    let mut tail = false;
    for (lane, tv) in batch.iter().enumerate() {
        if !tv.valid {
            tail = true;
            continue;
        }
        if tail {
            return Err(AccumulatorError::GapBeforeTail { lane });
        }
        if seen.last() != Some(&tv.tag) {
            if seen.contains(&tv.tag) {
                return Err(AccumulatorError::NonContiguousRun { tag: tv.tag, lane });
            }
            seen.push(tv.tag);
        }
    }
    Ok(())
}

/// Segmented inclusive scan of one batch through the Ladner-Fischer network.
/// `out[i]` combines every lane of `i`'s run up to and including `i`.
pub fn segmented_scan<T: Payload>(
    batch: &[TaggedValue<T>],
    op: CombineOp,
) -> Result<Vec<T>, AccumulatorError> {
    let net = ScanNetwork::new(batch.len())?;
    net.scan(batch, op)
}

/// `(tag, last lane)` for every run in the batch, in lane order.
pub fn run_ends<T>(batch: &[TaggedValue<T>]) -> Vec<(VertexId, usize)> {
    let mut ends: Vec<(VertexId, usize)> = Vec::new();
    for (lane, tv) in batch.iter().enumerate().filter(|(_, tv)| tv.valid) {
        match ends.last_mut() {
            Some((tag, last)) if *tag == tv.tag => *last = lane,
            _ => ends.push((tv.tag, lane)),
        }
    }
    ends
}

/// Multiplexer: pick each scheduled vertex's value at its last-edge lane.
pub fn select_results<T: Payload>(
    scanned: &[T],
    selections: &[(VertexId, usize)],
) -> Vec<AccumulatedResult<T>> {
    selections
        .iter()
        .map(|&(tag, port)| AccumulatedResult { tag, value: scanned[port], source_port: port })
        .collect()
}
