//! Degree-aware vertex scheduling.
//!
//! Edges are streamed sequentially one cacheline at a time, and vertices are
//! scheduled from the offsets of whatever the current cacheline contains.
//! Work items are dealt round-robin to `N` vertex units; each cycle every
//! unit compares its head item against the cacheline, so at most `N`
//! vertices are scheduled per cycle. A cacheline holding more than `N`
//! vertices takes several cycles.

use std::collections::VecDeque;
use std::ops::Range;

use crate::graph::{Graph, VertexId};

/// A destination vertex and its half-open edge interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VertexWorkItem {
    pub vertex: VertexId,
    pub left: u64,
    pub right: u64,
}

/// Work items for the vertices of `range` that have at least one edge, in
/// ascending ID order.
pub fn work_items(g: &Graph, range: Range<VertexId>) -> Vec<VertexWorkItem> {
    let offsets = g.offsets();
    range
        .filter_map(|v| {
            let (left, right) = (offsets[v as usize], offsets[v as usize + 1]);
            (left < right).then_some(VertexWorkItem { vertex: v, left, right })
        })
        .collect()
}

/// Cacheline base addresses (edge indices) covering `total_edges` edges.
pub fn generate_addresses(total_edges: u64, lanes: usize) -> impl Iterator<Item = u64> {
    let lanes = lanes as u64;
    (0..total_edges.div_ceil(lanes)).map(move |i| i * lanes)
}

/// A vertex scheduled in one cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScheduledVertex {
    pub vertex: VertexId,
    /// Absolute edge indices consumed for this vertex this cycle.
    pub first_edge: u64,
    pub end_edge: u64,
    /// Whether this cycle consumed the vertex's final edge.
    pub popped: bool,
}

impl ScheduledVertex {
    pub fn lanes(&self) -> u64 {
        self.end_edge - self.first_edge
    }
}

/// Outcome of one scheduling cycle on one cacheline.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScheduleStep {
    pub address: u64,
    pub vertices: Vec<ScheduledVertex>,
    /// Absolute edge range consumed this cycle.
    pub edges: Range<u64>,
    /// True on the first cycle spent on this cacheline.
    pub first_of_line: bool,
    /// True when the cacheline has been fully consumed.
    pub line_done: bool,
}

impl ScheduleStep {
    pub fn pops(&self) -> usize {
        self.vertices.iter().filter(|v| v.popped).count()
    }

    /// Destination tag of every consumed lane, in lane order.
    pub fn lane_tags(&self) -> Vec<VertexId> {
        self.vertices
            .iter()
            .flat_map(|v| std::iter::repeat_n(v.vertex, v.lanes() as usize))
            .collect()
    }

    /// `(vertex, index of its last lane within this step)` for the
    /// multiplexer.
    pub fn last_lanes(&self) -> Vec<(VertexId, usize)> {
        self.vertices
            .iter()
            .map(|v| (v.vertex, (v.end_edge - 1 - self.edges.start) as usize))
            .collect()
    }
}

pub struct VertexScheduler {
    units: Vec<VecDeque<VertexWorkItem>>,
    /// Unit whose head holds the lowest unscheduled vertex.
    next_unit: usize,
    lanes: u64,
    /// `(address, cursor)` of a cacheline that is partially consumed.
    in_progress: Option<(u64, u64)>,
    extra_cycles: u64,
}

impl VertexScheduler {
    /// `items` must be in ascending vertex order with non-overlapping,
    /// ascending intervals.
    pub fn new(items: Vec<VertexWorkItem>, units: usize, lanes: usize) -> Self {
        assert!(units >= 1 && lanes >= 1);
        debug_assert!(items.windows(2).all(|w| w[0].vertex < w[1].vertex && w[0].right <= w[1].left));
        let mut queues = vec![VecDeque::new(); units];
        for (i, item) in items.into_iter().enumerate() {
            queues[i % units].push_back(item);
        }
        Self { units: queues, next_unit: 0, lanes: lanes as u64, in_progress: None, extra_cycles: 0 }
    }

    pub fn unit_count(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.iter().all(VecDeque::is_empty)
    }

    /// Cycles spent beyond the first on over-subscribed cachelines.
    pub fn extra_cycles(&self) -> u64 {
        self.extra_cycles
    }

    /// Runs one scheduling cycle against the cacheline at `address`. Call
    /// repeatedly with the same address until `line_done`.
    pub fn schedule(&mut self, address: u64) -> ScheduleStep {
        let line_end = address + self.lanes;
        let (first_of_line, mut cursor) = match self.in_progress {
            Some((a, c)) if a == address => (false, c),
            _ => (true, address),
        };
        if !first_of_line {
            self.extra_cycles += 1;
        }

        let n = self.units.len();
        let mut vertices = Vec::with_capacity(n);
        let start = cursor;
        let mut popped_all = true;
        for _ in 0..n {
            let unit = self.next_unit;
            let Some(top) = self.units[unit].front().copied() else { break };
            if top.left >= line_end {
                break;
            }
            debug_assert!(top.right > cursor, "stale work item");
            let first_edge = top.left.max(cursor);
            let end_edge = top.right.min(line_end);
            let popped = line_end >= top.right;
            vertices.push(ScheduledVertex { vertex: top.vertex, first_edge, end_edge, popped });
            cursor = end_edge;
            if popped {
                self.units[unit].pop_front();
                self.next_unit = (unit + 1) % n;
            } else {
                popped_all = false;
                break;
            }
        }

        let more_in_line = popped_all
            && cursor < line_end
            && self.units[self.next_unit].front().is_some_and(|t| t.left < line_end);
        self.in_progress = more_in_line.then_some((address, cursor));
        ScheduleStep {
            address,
            edges: start..cursor,
            vertices,
            first_of_line,
            line_done: !more_in_line,
        }
    }
}
