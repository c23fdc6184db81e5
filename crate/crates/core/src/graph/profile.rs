use std::collections::BTreeMap;

use serde::Serialize;

use super::Graph;

/// Degree statistics in the graph's primary orientation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegreeProfile {
    /// degree -> number of vertices with that degree
    pub histogram: BTreeMap<usize, usize>,
    pub num_vertices: usize,
    pub num_edges: usize,
}

impl DegreeProfile {
    pub fn average_degree(&self) -> f64 {
        if self.num_vertices == 0 {
            0.0
        } else {
            self.num_edges as f64 / self.num_vertices as f64
        }
    }

    /// Fraction of edges owned by vertices whose degree is at least
    /// `threshold`.
    pub fn covered_edge_fraction(&self, threshold: usize) -> f64 {
        if self.num_edges == 0 {
            return if threshold == 0 { 1.0 } else { 0.0 };
        }
        let covered: usize = self.histogram.range(threshold..).map(|(&d, &count)| d * count).sum();
        covered as f64 / self.num_edges as f64
    }
}

pub fn degree_profile(g: &Graph) -> DegreeProfile {
    let mut histogram = BTreeMap::new();
    for v in g.vertices() {
        *histogram.entry(g.degree(v)).or_insert(0) += 1;
    }
    DegreeProfile { histogram, num_vertices: g.num_vertices(), num_edges: g.num_edges() }
}
