//! Compressed adjacency graphs.
//!
//! The primary orientation is destination-major: `neighbors(v)` lists the
//! sources of the in-edges of `v`, in the order they were supplied. The
//! accumulator relies on that grouping, since every update value for one
//! destination arrives as a contiguous run.

mod generate;
mod io;
mod profile;

pub use generate::generate_powerlaw;
pub use io::{load_edge_list, parse_edge_list, read_binary, write_binary, BINARY_MAGIC, BINARY_VERSION};
pub use profile::{degree_profile, DegreeProfile};

use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type VertexId = u32;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("edge list contains no edges")]
    Empty,
    #[error("invalid generator parameters: {0}")]
    InvalidParameters(String),
    #[error("malformed binary graph: {0}")]
    Format(String),
    #[error("vertex {vertex} out of range for {num_vertices} vertices")]
    VertexOutOfRange { vertex: u64, num_vertices: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Which endpoint the adjacency is grouped by.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    /// Grouped by destination; neighbors are sources (CSC-like).
    InEdges,
    /// Grouped by source; neighbors are destinations (CSR-like).
    OutEdges,
}

impl Direction {
    pub(crate) fn to_byte(self) -> u8 {
        match self {
            Direction::InEdges => 0,
            Direction::OutEdges => 1,
        }
    }

    pub(crate) fn from_byte(b: u8) -> Option<Self> {
        match b {
            0 => Some(Direction::InEdges),
            1 => Some(Direction::OutEdges),
            _ => None,
        }
    }
}

/// Immutable compressed adjacency.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<u64>,
    neighbors: Vec<VertexId>,
    direction: Direction,
}

impl Graph {
    /// Builds a graph from raw arrays, checking every structural invariant.
    pub fn from_parts(
        offsets: Vec<u64>,
        neighbors: Vec<VertexId>,
        direction: Direction,
    ) -> Result<Self, GraphError> {
        if offsets.is_empty() {
            return Err(GraphError::Format("offsets must have num_vertices + 1 entries".into()));
        }
        if offsets[0] != 0 {
            return Err(GraphError::Format("offsets[0] must be 0".into()));
        }
        if offsets.windows(2).any(|w| w[0] > w[1]) {
            return Err(GraphError::Format("offsets must be non-decreasing".into()));
        }
        if *offsets.last().unwrap() != neighbors.len() as u64 {
            return Err(GraphError::Format(format!(
                "last offset {} does not match {} edges",
                offsets.last().unwrap(),
                neighbors.len()
            )));
        }
        let n = offsets.len() - 1;
        if n as u64 >= u64::from(VertexId::MAX) {
            return Err(GraphError::Format("too many vertices".into()));
        }
        if let Some(&bad) = neighbors.iter().find(|&&u| u as usize >= n) {
            return Err(GraphError::VertexOutOfRange { vertex: bad.into(), num_vertices: n });
        }
        Ok(Self { offsets, neighbors, direction })
    }

    /// Groups `(src, dst)` edges by the endpoint selected by `direction`.
    /// Within each group, neighbors keep the order of `edges`.
    pub fn from_edges(
        num_vertices: usize,
        edges: &[(VertexId, VertexId)],
        direction: Direction,
    ) -> Result<Self, GraphError> {
        let key = |&(s, d): &(VertexId, VertexId)| match direction {
            Direction::InEdges => (d, s),
            Direction::OutEdges => (s, d),
        };
        let mut counts = vec![0u64; num_vertices + 1];
        for e in edges {
            let (owner, other) = key(e);
            for x in [owner, other] {
                if x as usize >= num_vertices {
                    return Err(GraphError::VertexOutOfRange { vertex: x.into(), num_vertices });
                }
            }
            counts[owner as usize + 1] += 1;
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let offsets = counts;
        let mut cursor: Vec<u64> = offsets[..num_vertices].to_vec();
        let mut neighbors = vec![0; edges.len()];
        for e in edges {
            let (owner, other) = key(e);
            let slot = &mut cursor[owner as usize];
            neighbors[*slot as usize] = other;
            *slot += 1;
        }
        Self::from_parts(offsets, neighbors, direction)
    }

    pub fn num_vertices(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn num_edges(&self) -> usize {
        self.neighbors.len()
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn offsets(&self) -> &[u64] {
        &self.offsets
    }

    pub fn neighbor_array(&self) -> &[VertexId] {
        &self.neighbors
    }

    /// Half-open range of `v`'s edges in the neighbor array.
    pub fn edge_range(&self, v: VertexId) -> Range<usize> {
        let v = v as usize;
        self.offsets[v] as usize..self.offsets[v + 1] as usize
    }

    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.neighbors[self.edge_range(v)]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        let v = v as usize;
        (self.offsets[v + 1] - self.offsets[v]) as usize
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        0..self.num_vertices() as VertexId
    }

    /// Every edge as `(src, dst)`, in storage order.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.vertices().flat_map(move |v| {
            self.neighbors(v).iter().map(move |&u| match self.direction {
                Direction::InEdges => (u, v),
                Direction::OutEdges => (v, u),
            })
        })
    }

    /// Degree of every vertex in the opposite orientation (out-degree for an
    /// in-edge graph).
    pub fn opposite_degrees(&self) -> Vec<u32> {
        let mut deg = vec![0u32; self.num_vertices()];
        for &u in &self.neighbors {
            deg[u as usize] += 1;
        }
        deg
    }

    /// Same edge multiset, regrouped in the other orientation.
    pub fn transpose(&self) -> Graph {
        let other = match self.direction {
            Direction::InEdges => Direction::OutEdges,
            Direction::OutEdges => Direction::InEdges,
        };
        let edges: Vec<_> = self.edges().collect();
        Graph::from_edges(self.num_vertices(), &edges, other).expect("edges already validated")
    }

    /// Destination-major view, transposing if needed.
    pub fn to_in_edges(&self) -> Graph {
        match self.direction {
            Direction::InEdges => self.clone(),
            Direction::OutEdges => self.transpose(),
        }
    }

    /// Symmetric closure of the edge multiset: `(u, v)` appears
    /// `max(m(u,v), m(v,u))` times. Applying it twice is a no-op, and an
    /// already-undirected edge list is left as is.
    pub fn symmetrized(&self) -> Graph {
        use std::collections::HashMap;
        let mut count: HashMap<(VertexId, VertexId), u32> = HashMap::new();
        for e in self.edges() {
            *count.entry(e).or_default() += 1;
        }
        let mut edges: Vec<_> = self.edges().collect();
        let mut missing: HashMap<(VertexId, VertexId), u32> = HashMap::new();
        for (&(s, d), &m) in &count {
            let rev = count.get(&(d, s)).copied().unwrap_or(0);
            if m > rev {
                missing.insert((d, s), m - rev);
            }
        }
        // Append in storage order of the forward edge so the result is
        // deterministic.
        let forward: Vec<_> = self.edges().collect();
        for (s, d) in forward {
            if let Some(k) = missing.get_mut(&(d, s)) {
                if *k > 0 {
                    *k -= 1;
                    edges.push((d, s));
                }
            }
        }
        Graph::from_edges(self.num_vertices(), &edges, self.direction).expect("edges already validated")
    }

    /// Same offsets, replacement neighbor array. Used by preprocessing
    /// passes that permute neighbors within each vertex.
    pub(crate) fn with_neighbors(&self, neighbors: Vec<VertexId>) -> Graph {
        debug_assert_eq!(neighbors.len(), self.neighbors.len());
        Graph { offsets: self.offsets.clone(), neighbors, direction: self.direction }
    }
}
