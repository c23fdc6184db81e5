use std::collections::VecDeque;

use super::MemoryError;
use crate::graph::VertexId;

/// Identifies a read so its data can be matched up after service.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ReadRequest {
    pub vertex: VertexId,
    /// Reorder-buffer token of the originating batch.
    pub token: usize,
    pub lane: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReadResponse<T> {
    pub request: ReadRequest,
    pub value: T,
}

struct Bank<T> {
    data: Vec<T>,
    queue: VecDeque<ReadRequest>,
    pending_write: Option<(usize, T)>,
}

/// Vertex storage split over `P` banks by `vertex mod P`. Each bank has one
/// read port, fed from a bounded request FIFO, and one write port per cycle.
/// Writes become visible to reads served in a later cycle.
pub struct BankedMemory<T> {
    banks: Vec<Bank<T>>,
    queue_depth: usize,
    mask: usize,
    shift: u32,
}

impl<T: Copy> BankedMemory<T> {
    pub fn new(bank_count: usize, queue_depth: usize, data: &[T]) -> Result<Self, MemoryError> {
        if bank_count == 0 || !bank_count.is_power_of_two() {
            return Err(MemoryError::BadBankCount(bank_count));
        }
        if queue_depth == 0 {
            return Err(MemoryError::ZeroQueueDepth);
        }
        let banks = (0..bank_count)
            .map(|b| Bank {
                data: data.iter().skip(b).step_by(bank_count).copied().collect(),
                queue: VecDeque::with_capacity(queue_depth),
                pending_write: None,
            })
            .collect();
        Ok(Self { banks, queue_depth, mask: bank_count - 1, shift: bank_count.trailing_zeros() })
    }

    pub fn bank_count(&self) -> usize {
        self.banks.len()
    }

    pub fn queue_depth(&self) -> usize {
        self.queue_depth
    }

    #[inline]
    pub fn bank_of(&self, v: VertexId) -> usize {
        v as usize & self.mask
    }

    #[inline]
    fn locate(&self, v: VertexId) -> (usize, usize) {
        (v as usize & self.mask, v as usize >> self.shift)
    }

    pub fn queue_len(&self, bank: usize) -> usize {
        self.banks[bank].queue.len()
    }

    pub fn has_room(&self, bank: usize) -> bool {
        self.banks[bank].queue.len() < self.queue_depth
    }

    pub fn queued(&self) -> usize {
        self.banks.iter().map(|b| b.queue.len()).sum()
    }

    pub fn enqueue(&mut self, req: ReadRequest) -> Result<(), MemoryError> {
        let bank = self.bank_of(req.vertex);
        if !self.has_room(bank) {
            return Err(MemoryError::QueueFull { bank });
        }
        self.banks[bank].queue.push_back(req);
        Ok(())
    }

    /// Claims the bank's write port for this cycle. The value lands at the
    /// end of the next [`step`](Self::step).
    pub fn write(&mut self, v: VertexId, value: T) -> Result<(), MemoryError> {
        let (bank, idx) = self.locate(v);
        let slot = &mut self.banks[bank].pending_write;
        if slot.is_some() {
            return Err(MemoryError::WritePortBusy { bank });
        }
        *slot = Some((idx, value));
        Ok(())
    }

    pub fn write_port_free(&self, v: VertexId) -> bool {
        self.banks[self.bank_of(v)].pending_write.is_none()
    }

    /// Committed value, bypassing the ports.
    pub fn peek(&self, v: VertexId) -> T {
        let (bank, idx) = self.locate(v);
        self.banks[bank].data[idx]
    }

    /// Overwrites storage directly (bulk load between passes).
    pub fn load(&mut self, data: &[T]) {
        let p = self.banks.len();
        for (b, bank) in self.banks.iter_mut().enumerate() {
            bank.data.clear();
            bank.data.extend(data.iter().skip(b).step_by(p).copied());
            bank.pending_write = None;
        }
    }

    /// Advances one cycle: every bank serves its queue head from committed
    /// storage, then pending writes commit.
    pub fn step(&mut self, out: &mut Vec<ReadResponse<T>>) {
        let shift = self.shift;
        for bank in &mut self.banks {
            if let Some(req) = bank.queue.pop_front() {
                let value = bank.data[req.vertex as usize >> shift];
                out.push(ReadResponse { request: req, value });
            }
            if let Some((idx, value)) = bank.pending_write.take() {
                bank.data[idx] = value;
            }
        }
    }

    pub fn snapshot(&self) -> Vec<T> {
        let n: usize = self.banks.iter().map(|b| b.data.len()).sum();
        (0..n as VertexId).map(|v| self.peek(v)).collect()
    }
}
