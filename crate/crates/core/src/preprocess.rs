//! Offline edge rearranging and destination-range partitioning.

use std::collections::BTreeMap;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Direction, Graph, VertexId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PreprocessError {
    #[error("partition count must be a power of two >= 1, got {0}")]
    BadBankCount(usize),
    #[error("partition count {k} must be in 1..={num_vertices}")]
    BadPartitionCount { k: usize, num_vertices: usize },
    #[error("batch width must be at least 1")]
    ZeroBatchWidth,
    #[error("graph must be destination-major")]
    NotDestinationMajor,
}

/// Number of on-chip banks the rearranged order is balanced for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RearrangeConfig {
    banks: usize,
}

impl RearrangeConfig {
    pub fn new(banks: usize) -> Result<Self, PreprocessError> {
        if banks == 0 || !banks.is_power_of_two() {
            return Err(PreprocessError::BadBankCount(banks));
        }
        Ok(Self { banks })
    }

    pub fn banks(&self) -> usize {
        self.banks
    }
}

/// Reorders each vertex's neighbor list so that consecutive neighbors fall
/// into different banks.
///
/// Neighbors are bucketed by `id mod P` (stable), then emitted round-robin
/// over the buckets starting at bucket 0. Empty buckets are skipped without
/// consuming a slot, so the emission order is: the first element of every
/// non-empty bucket in bucket order, then every second element, and so on.
pub fn rearrange_edges(g: &Graph, cfg: RearrangeConfig) -> Result<Graph, PreprocessError> {
    if g.direction() != Direction::InEdges {
        return Err(PreprocessError::NotDestinationMajor);
    }
    let p = cfg.banks;
    let mask = (p - 1) as VertexId;
    let mut out = Vec::with_capacity(g.num_edges());
    let mut buckets: Vec<Vec<VertexId>> = vec![Vec::new(); p];
    let mut live: Vec<usize> = Vec::with_capacity(p);

    for v in g.vertices() {
        let list = g.neighbors(v);
        if list.len() <= 1 {
            out.extend_from_slice(list);
            continue;
        }
        for b in buckets.iter_mut() {
            b.clear();
        }
        for &u in list {
            buckets[(u & mask) as usize].push(u);
        }
        live.clear();
        live.extend((0..p).filter(|&b| !buckets[b].is_empty()));
        let mut round = 0;
        while !live.is_empty() {
            for &b in &live {
                out.push(buckets[b][round]);
            }
            round += 1;
            live.retain(|&b| buckets[b].len() > round);
        }
    }
    Ok(g.with_neighbors(out))
}

/// One destination-range slice of a graph. The sub-graph keeps global vertex
/// IDs; vertices outside `vertex_range` have no edges in it.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphPartition {
    pub part_index: usize,
    pub vertex_range: Range<VertexId>,
    pub sub_graph: Graph,
}

/// Near-equal contiguous vertex ranges (sizes differ by at most one).
pub fn partition_ranges(num_vertices: usize, k: usize) -> Result<Vec<Range<VertexId>>, PreprocessError> {
    if k == 0 || k > num_vertices {
        return Err(PreprocessError::BadPartitionCount { k, num_vertices });
    }
    let base = num_vertices / k;
    let extra = num_vertices % k;
    let mut start = 0usize;
    Ok((0..k)
        .map(|i| {
            let len = base + usize::from(i < extra);
            let r = start as VertexId..(start + len) as VertexId;
            start += len;
            r
        })
        .collect())
}

/// Splits by destination vertex range. Every edge lands in the part that
/// owns its destination; neighbor order within a vertex is unchanged.
pub fn partition_by_destination(g: &Graph, k: usize) -> Result<Vec<GraphPartition>, PreprocessError> {
    if g.direction() != Direction::InEdges {
        return Err(PreprocessError::NotDestinationMajor);
    }
    let ranges = partition_ranges(g.num_vertices(), k)?;
    let n = g.num_vertices();
    Ok(ranges
        .into_iter()
        .enumerate()
        .map(|(part_index, range)| {
            let lo = g.offsets()[range.start as usize];
            let hi = g.offsets()[range.end as usize];
            let offsets: Vec<u64> = (0..=n)
                .map(|v| (g.offsets()[v.clamp(range.start as usize, range.end as usize)]) - lo)
                .collect();
            let neighbors = g.neighbor_array()[lo as usize..hi as usize].to_vec();
            let sub_graph = Graph::from_parts(offsets, neighbors, Direction::InEdges)
                .expect("slice of a valid graph");
            GraphPartition { part_index, vertex_range: range, sub_graph }
        })
        .collect())
}

/// Histogram of the worst per-bank load over consecutive `batch_width`-edge
/// windows of the neighbor array (the last window may be short).
pub fn bank_conflict_profile(
    g: &Graph,
    banks: usize,
    batch_width: usize,
) -> Result<BTreeMap<usize, usize>, PreprocessError> {
    if batch_width == 0 {
        return Err(PreprocessError::ZeroBatchWidth);
    }
    if banks == 0 {
        return Err(PreprocessError::BadBankCount(banks));
    }
    let mut hist = BTreeMap::new();
    let mut load = vec![0usize; banks];
    for window in g.neighbor_array().chunks(batch_width) {
        load.iter_mut().for_each(|x| *x = 0);
        for &u in window {
            load[u as usize % banks] += 1;
        }
        *hist.entry(*load.iter().max().unwrap()).or_insert(0) += 1;
    }
    Ok(hist)
}

/// Mean of a max-per-bank histogram.
pub fn mean_max_per_bank(hist: &BTreeMap<usize, usize>) -> f64 {
    let windows: usize = hist.values().sum();
    if windows == 0 {
        return 0.0;
    }
    hist.iter().map(|(&k, &c)| (k * c) as f64).sum::<f64>() / windows as f64
}
