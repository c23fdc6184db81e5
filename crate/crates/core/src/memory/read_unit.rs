use super::{BankedMemory, MemoryError, MemoryMode, ReadRequest};
use crate::graph::VertexId;

/// Source-vertex reads generated from one edge batch.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReadBatch {
    pub token: usize,
    /// `(lane, source vertex)` in lane order.
    pub requests: Vec<(usize, VertexId)>,
}

/// Shuffles a batch's reads into the per-bank request queues.
///
/// Holds at most one batch. Reads whose bank queue is full stay in the unit
/// and retry next cycle; other lanes go ahead. In blocking mode a new batch
/// is only taken once every bank queue has drained.
#[derive(Clone, Debug)]
pub struct SourceReadUnit {
    mode: MemoryMode,
    pending: Option<ReadBatch>,
    full_queue_cycles: u64,
}

impl SourceReadUnit {
    pub fn new(mode: MemoryMode) -> Self {
        Self { mode, pending: None, full_queue_cycles: 0 }
    }

    pub fn mode(&self) -> MemoryMode {
        self.mode
    }

    pub fn is_idle(&self) -> bool {
        self.pending.is_none()
    }

    /// Cycles in which a full bank queue held back at least one read.
    pub fn full_queue_cycles(&self) -> u64 {
        self.full_queue_cycles
    }

    pub fn can_accept<T: Copy>(&self, mem: &BankedMemory<T>) -> bool {
        self.pending.is_none() && (self.mode == MemoryMode::OutOfOrder || mem.queued() == 0)
    }

    pub fn accept(&mut self, batch: ReadBatch) {
        assert!(self.pending.is_none(), "read unit already holds a batch");
        self.pending = Some(batch);
    }

    /// Moves as many held reads as fit into the bank queues. Returns true
    /// if some read was held back by a full queue.
    pub fn pump<T: Copy>(&mut self, mem: &mut BankedMemory<T>) -> bool {
        let Some(batch) = self.pending.as_mut() else { return false };
        let token = batch.token;
        batch.requests.retain(|&(lane, vertex)| {
            mem.enqueue(ReadRequest { vertex, token, lane }).is_err()
        });
        let blocked = !batch.requests.is_empty();
        if blocked {
            self.full_queue_cycles += 1;
        } else {
            self.pending = None;
        }
        blocked
    }
}

/// Cycle-by-cycle service of a request trace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IssueTrace {
    pub cycles: u64,
    /// `(batch index, lane)` served in each cycle.
    pub served: Vec<Vec<(usize, usize)>>,
}

/// Runs batches of vertex reads (one batch per edge cacheline) through the
/// banks and reports when each read is served. At most one batch enters
/// the read unit per cycle.
pub fn issue_batches(
    batches: &[Vec<VertexId>],
    bank_count: usize,
    queue_depth: usize,
    mode: MemoryMode,
) -> Result<IssueTrace, MemoryError> {
    let size = batches.iter().flatten().map(|&v| v as usize + 1).max().unwrap_or(0);
    let mut mem = BankedMemory::new(bank_count, queue_depth, &vec![(); size])?;
    let mut unit = SourceReadUnit::new(mode);
    let total: usize = batches.iter().map(Vec::len).sum();
    let mut next = 0;
    let mut done = 0;
    let mut served = Vec::new();
    let mut responses = Vec::new();
    while done < total {
        while next < batches.len() && batches[next].is_empty() {
            next += 1;
        }
        if next < batches.len() && unit.can_accept(&mem) {
            let requests = batches[next].iter().copied().enumerate().collect();
            unit.accept(ReadBatch { token: next, requests });
            next += 1;
        }
        unit.pump(&mut mem);
        responses.clear();
        mem.step(&mut responses);
        done += responses.len();
        served.push(responses.iter().map(|r| (r.request.token, r.request.lane)).collect());
    }
    Ok(IssueTrace { cycles: served.len() as u64, served })
}
