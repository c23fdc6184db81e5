use std::collections::VecDeque;

use super::MemoryError;

/// Maximum lanes a slot can track.
pub const MAX_LANES: usize = 64;

/// A batch handed back in original request order.
#[derive(Clone, Debug, PartialEq)]
pub struct ReleasedBatch<T> {
    pub line: u64,
    /// `(lane, payload)` in lane order.
    pub lanes: Vec<(usize, T)>,
}

struct Slot<T> {
    line: u64,
    arrived: u64,
    /// Outstanding batches of this line.
    users: usize,
    payloads: Vec<Option<T>>,
}

struct Outstanding {
    token: usize,
    line: u64,
    mask: u64,
}

/// Restores request order after out-of-order bank service.
///
/// A batch's token is the low `log2(m)` bits of its cacheline index; data
/// with the same token lands in the same slot. Batches from the same
/// cacheline share a slot (their lanes are disjoint). A batch whose slot is
/// held by a different, incomplete cacheline cannot be admitted.
pub struct ReorderBuffer<T> {
    slots: Vec<Option<Slot<T>>>,
    order: VecDeque<Outstanding>,
    lanes: usize,
    collisions: u64,
}

impl<T: Copy> ReorderBuffer<T> {
    pub fn new(capacity: usize, lanes: usize) -> Result<Self, MemoryError> {
        if capacity == 0 || !capacity.is_power_of_two() {
            return Err(MemoryError::BadReorderCapacity(capacity));
        }
        if lanes == 0 || lanes > MAX_LANES {
            return Err(MemoryError::BadLaneCount(lanes));
        }
        Ok(Self {
            slots: (0..capacity).map(|_| None).collect(),
            order: VecDeque::new(),
            lanes,
            collisions: 0,
        })
    }

    pub fn capacity(&self) -> usize {
        self.slots.len()
    }

    pub fn token_of(&self, line: u64) -> usize {
        (line as usize) & (self.slots.len() - 1)
    }

    pub fn in_flight(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Admissions refused because the token's slot was held by another line.
    pub fn collisions(&self) -> u64 {
        self.collisions
    }

    pub fn can_admit(&self, line: u64) -> bool {
        match &self.slots[self.token_of(line)] {
            None => true,
            Some(s) => s.line == line,
        }
    }

    /// Registers a batch covering `lanes` of cacheline `line`. Returns the
    /// token its reads must carry.
    pub fn admit(&mut self, line: u64, lanes: &[usize]) -> Result<usize, MemoryError> {
        let token = self.token_of(line);
        if !self.can_admit(line) {
            self.collisions += 1;
            return Err(MemoryError::TokenBusy { token });
        }
        let mut mask = 0u64;
        for &lane in lanes {
            if lane >= self.lanes {
                return Err(MemoryError::BadLaneCount(lane + 1));
            }
            mask |= 1 << lane;
        }
        let width = self.lanes;
        let slot = self.slots[token].get_or_insert_with(|| Slot {
            line,
            arrived: 0,
            users: 0,
            payloads: vec![None; width],
        });
        slot.users += 1;
        self.order.push_back(Outstanding { token, line, mask });
        Ok(token)
    }

    pub fn arrive(&mut self, token: usize, lane: usize, value: T) {
        let slot = self.slots[token].as_mut().expect("arrival for an empty slot");
        slot.arrived |= 1 << lane;
        slot.payloads[lane] = Some(value);
    }

    /// Whether the oldest batch has all its data.
    pub fn head_ready(&self) -> bool {
        self.order.front().is_some_and(|head| {
            let slot = self.slots[head.token].as_ref().expect("outstanding batch without slot");
            slot.arrived & head.mask == head.mask
        })
    }

    /// Releases the oldest batch once all of its lanes have arrived.
    pub fn release(&mut self) -> Option<ReleasedBatch<T>> {
        if !self.head_ready() {
            return None;
        }
        let head = self.order.pop_front().unwrap();
        let slot = self.slots[head.token].as_mut().unwrap();
        debug_assert_eq!(slot.line, head.line);
        let mut lanes = Vec::with_capacity(head.mask.count_ones() as usize);
        let mut m = head.mask;
        while m != 0 {
            let lane = m.trailing_zeros() as usize;
            lanes.push((lane, slot.payloads[lane].take().unwrap()));
            m &= m - 1;
        }
        slot.arrived &= !head.mask;
        slot.users -= 1;
        if slot.users == 0 {
            self.slots[head.token] = None;
        }
        Some(ReleasedBatch { line: head.line, lanes })
    }
}

/// Feeds `arrivals` (token, lane, payload) into `rb` one at a time and
/// collects everything released along the way, in release order.
pub fn reorder_release<T: Copy>(
    rb: &mut ReorderBuffer<T>,
    arrivals: impl IntoIterator<Item = (usize, usize, T)>,
) -> Vec<ReleasedBatch<T>> {
    let mut out = Vec::new();
    for (token, lane, value) in arrivals {
        rb.arrive(token, lane, value);
        while let Some(b) = rb.release() {
            out.push(b);
        }
    }
    out
}
