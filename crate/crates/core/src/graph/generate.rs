use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Direction, Graph, GraphError, VertexId};

/// Synthetic graph with a power-law in-degree distribution.
///
/// Destinations are drawn from Zipf weights `rank^(-1/(skew-1))`, which gives
/// a degree tail `P(d) ~ d^-skew`; sources are drawn uniformly. Vertex IDs are
/// shuffled afterwards so that high-degree vertices do not cluster at low IDs.
/// The edge count is `round(num_vertices * avg_degree)`.
pub fn generate_powerlaw(
    num_vertices: usize,
    avg_degree: f64,
    skew: f64,
    seed: u64,
) -> Result<Graph, GraphError> {
    if num_vertices == 0 {
        return Err(GraphError::InvalidParameters("num_vertices must be at least 1".into()));
    }
    if avg_degree.is_nan() || avg_degree <= 0.0 || !avg_degree.is_finite() {
        return Err(GraphError::InvalidParameters(format!(
            "avg_degree must be positive, got {avg_degree}"
        )));
    }
    if skew.is_nan() || skew <= 1.0 || !skew.is_finite() {
        return Err(GraphError::InvalidParameters(format!("skew must exceed 1, got {skew}")));
    }
    if num_vertices as u64 >= u64::from(VertexId::MAX) {
        return Err(GraphError::InvalidParameters("too many vertices".into()));
    }
    let num_edges = (num_vertices as f64 * avg_degree).round() as u64;
    let capacity = (num_vertices as u64).saturating_mul(num_vertices as u64);
    if num_edges > capacity {
        return Err(GraphError::InvalidParameters(format!(
            "{num_edges} edges exceed num_vertices^2 = {capacity}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let exponent = 1.0 / (skew - 1.0);
    let weights: Vec<f64> = (1..=num_vertices).map(|r| (r as f64).powf(-exponent)).collect();
    let dest_dist = WeightedIndex::new(&weights)
        .map_err(|e| GraphError::InvalidParameters(format!("degenerate weights: {e}")))?;

    let mut relabel: Vec<VertexId> = (0..num_vertices as VertexId).collect();
    relabel.shuffle(&mut rng);

    let n = num_vertices as VertexId;
    let edges: Vec<(VertexId, VertexId)> = (0..num_edges)
        .map(|_| {
            let dst = relabel[dest_dist.sample(&mut rng)];
            let src = rng.gen_range(0..n);
            (src, dst)
        })
        .collect();
    Graph::from_edges(num_vertices, &edges, Direction::InEdges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_for_seed() {
        let a = generate_powerlaw(1000, 16.0, 2.0, 42).unwrap();
        let b = generate_powerlaw(1000, 16.0, 2.0, 42).unwrap();
        assert_eq!(a, b);
        let c = generate_powerlaw(1000, 16.0, 2.0, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn realized_degree_tracks_request() {
        let g = generate_powerlaw(10, 0.5, 2.0, 1).unwrap();
        let ratio = (g.num_edges() as f64 / 10.0) / 0.5;
        assert!((0.9..=1.1).contains(&ratio), "ratio {ratio}");

        let g = generate_powerlaw(5000, 7.3, 2.2, 9).unwrap();
        let ratio = (g.num_edges() as f64 / 5000.0) / 7.3;
        assert!((0.9..=1.1).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn rejects_degenerate_inputs() {
        assert!(generate_powerlaw(1, 0.0, 2.0, 1).is_err());
        assert!(generate_powerlaw(0, 1.0, 2.0, 1).is_err());
        assert!(generate_powerlaw(10, 1.0, 1.0, 1).is_err());
        assert!(generate_powerlaw(2, 5.0, 2.0, 1).is_err());
        assert!(generate_powerlaw(2, 2.0, 2.0, 1).is_ok());
    }

    #[test]
    fn skew_concentrates_edges() {
        // Top 10% of vertices by in-degree should own most edges for a heavy
        // tail, and close to 10% for a nearly uniform one.
        let top_share = |skew: f64| {
            let g = generate_powerlaw(4000, 16.0, skew, 5).unwrap();
            let mut deg: Vec<usize> = g.vertices().map(|v| g.degree(v)).collect();
            deg.sort_unstable_by(|a, b| b.cmp(a));
            deg[..400].iter().sum::<usize>() as f64 / g.num_edges() as f64
        };
        let heavy = top_share(2.0);
        let light = top_share(50.0);
        assert!(heavy > 0.6, "heavy tail share {heavy}");
        assert!(light < 0.2, "light tail share {light}");
        assert!(top_share(2.5) < heavy);
    }
}
