use super::MemoryError;
use crate::graph::VertexId;

pub const CACHELINE_BITS: usize = 512;

/// One cacheline of the edge array. Lanes past `valid` are padding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeLine {
    pub address: u64,
    pub sources: Vec<VertexId>,
    pub valid: usize,
}

/// Streaming off-chip channel: fixed latency, at most one cacheline
/// delivered per cycle.
#[derive(Clone, Debug)]
pub struct DramChannel {
    latency: u64,
    lanes: usize,
    last_delivery: Option<u64>,
    lines_delivered: u64,
}

impl DramChannel {
    pub fn new(latency: u64, lanes: usize) -> Self {
        assert!(lanes >= 1);
        Self { latency, lanes, last_delivery: None, lines_delivered: 0 }
    }

    pub fn latency(&self) -> u64 {
        self.latency
    }

    pub fn lanes(&self) -> usize {
        self.lanes
    }

    pub fn lines_delivered(&self) -> u64 {
        self.lines_delivered
    }

    /// Cycle at which a line requested at `cycle` arrives.
    pub fn issue(&mut self, cycle: u64) -> u64 {
        let mut at = cycle + self.latency;
        if let Some(last) = self.last_delivery {
            at = at.max(last + 1);
        }
        self.last_delivery = Some(at);
        self.lines_delivered += 1;
        at
    }

    /// Forgets the delivery history (a new independent stream).
    pub fn reset(&mut self) {
        self.last_delivery = None;
    }
}

/// Requests the cacheline at edge index `address` at `cycle`. Returns the
/// delivery cycle and the padded line.
pub fn fetch_edges(
    ch: &mut DramChannel,
    cycle: u64,
    address: u64,
    edges: &[VertexId],
) -> Result<(u64, EdgeLine), MemoryError> {
    let total = edges.len() as u64;
    if address >= total {
        return Err(MemoryError::AddressOutOfRange { address, edges: total });
    }
    if !address.is_multiple_of(ch.lanes as u64) {
        return Err(MemoryError::Unaligned(address));
    }
    let end = (address + ch.lanes as u64).min(total);
    let mut sources = edges[address as usize..end as usize].to_vec();
    let valid = sources.len();
    sources.resize(ch.lanes, 0);
    Ok((ch.issue(cycle), EdgeLine { address, sources, valid }))
}
