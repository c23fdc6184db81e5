#![allow(dead_code)]

use std::collections::VecDeque;

use accumsim_core::graph::{Direction, Graph, VertexId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random multigraph with up to `max_vertices` vertices and an average
/// degree drawn from [1, 32]. Self-loops and duplicate edges are allowed.
pub fn random_graph(seed: u64, max_vertices: usize) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_vertices);
    let avg = rng.gen_range(1.0..=32.0);
    let m = ((n as f64 * avg).round() as usize).min(n * n);
    let edges: Vec<(VertexId, VertexId)> =
        (0..m).map(|_| (rng.gen_range(0..n) as VertexId, rng.gen_range(0..n) as VertexId)).collect();
    Graph::from_edges(n, &edges, Direction::InEdges).unwrap()
}

pub fn corpus(count: u64, max_vertices: usize) -> impl Iterator<Item = Graph> {
    (0..count).map(move |seed| random_graph(seed, max_vertices))
}

/// `(src, dst)` pairs regardless of storage direction.
pub fn directed_edges(g: &Graph) -> Vec<(VertexId, VertexId)> {
    g.vertices()
        .flat_map(|v| {
            g.neighbors(v).iter().map(move |&u| match g.direction() {
                Direction::InEdges => (u, v),
                Direction::OutEdges => (v, u),
            })
        })
        .collect()
}

/// Hop distances by queue BFS, capped at 255 (also the unreached value).
pub fn bfs_oracle(g: &Graph, root: VertexId) -> Vec<u8> {
    let n = g.num_vertices();
    let mut adj = vec![Vec::new(); n];
    for (s, d) in directed_edges(g) {
        adj[s as usize].push(d);
    }
    let mut dist = vec![usize::MAX; n];
    dist[root as usize] = 0;
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        for &w in &adj[u as usize] {
            if dist[w as usize] == usize::MAX {
                dist[w as usize] = dist[u as usize] + 1;
                queue.push_back(w);
            }
        }
    }
    dist.into_iter().map(|d| d.min(255) as u8).collect()
}

/// Smallest vertex ID of each weakly connected component, via union-find.
pub fn wcc_oracle(g: &Graph) -> Vec<u32> {
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let n = g.num_vertices();
    let mut parent: Vec<usize> = (0..n).collect();
    for (s, d) in directed_edges(g) {
        let (a, b) = (find(&mut parent, s as usize), find(&mut parent, d as usize));
        // Keep the smaller root so the root is the component minimum.
        if a < b {
            parent[b] = a;
        } else {
            parent[a] = b;
        }
    }
    (0..n).map(|v| find(&mut parent, v) as u32).collect()
}

/// Dense PageRank in f64: `r'(v) = eps + sum over u->v of r(u)/outdeg(u)`,
/// starting from all ones.
pub fn pagerank_oracle(g: &Graph, epsilon: f64, iterations: usize) -> Vec<f64> {
    let n = g.num_vertices();
    let edges = directed_edges(g);
    let mut outdeg = vec![0usize; n];
    for &(s, _) in &edges {
        outdeg[s as usize] += 1;
    }
    let mut rank = vec![1.0f64; n];
    for _ in 0..iterations {
        let mut next = vec![epsilon; n];
        for &(s, d) in &edges {
            next[d as usize] += rank[s as usize] / outdeg[s as usize] as f64;
        }
        rank = next;
    }
    rank
}

pub fn max_out_degree_vertex(g: &Graph) -> VertexId {
    let out = g.opposite_degrees();
    (0..g.num_vertices() as VertexId).max_by_key(|&v| (out[v as usize], std::cmp::Reverse(v))).unwrap_or(0)
}
