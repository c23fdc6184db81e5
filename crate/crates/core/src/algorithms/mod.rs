//! Vertex programs (BFS, PageRank, WCC) and a serial reference executor.
//!
//! Every program is expressed as: each iteration, every edge `(u, v)` whose
//! source is active emits `scatter(u)`, the emissions for `v` are combined
//! with the program's atomic operator, and the combined value is folded
//! into a fresh copy of `v`'s state. Vertices whose state changed form the
//! next frontier.

use std::borrow::Cow;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::accumulator::{CombineOp, Payload};
use crate::graph::{Graph, VertexId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgorithmError {
    #[error("root {root} is out of range for {num_vertices} vertices")]
    RootOutOfRange { root: VertexId, num_vertices: usize },
    #[error("iteration count must be at least 1")]
    ZeroIterations,
    #[error("epsilon must be finite, got {0}")]
    BadEpsilon(f32),
}

/// Unreached BFS depth.
pub const BFS_UNREACHED: u8 = u8::MAX;

pub const DEFAULT_EPSILON: f32 = 0.15;
pub const DEFAULT_PR_ITERATIONS: usize = 10;

/// Current and next scheduling lists as dense membership flags.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frontier {
    current: Vec<bool>,
    next: Vec<bool>,
    current_len: usize,
    next_len: usize,
}

impl Frontier {
    pub fn empty(n: usize) -> Self {
        Self { current: vec![false; n], next: vec![false; n], current_len: 0, next_len: 0 }
    }

    pub fn all(n: usize) -> Self {
        Self { current: vec![true; n], next: vec![false; n], current_len: n, next_len: 0 }
    }

    pub fn single(n: usize, v: VertexId) -> Self {
        let mut f = Self::empty(n);
        f.current[v as usize] = true;
        f.current_len = 1;
        f
    }

    #[inline]
    pub fn is_active(&self, v: VertexId) -> bool {
        self.current[v as usize]
    }

    pub fn current(&self) -> &[bool] {
        &self.current
    }

    pub fn len(&self) -> usize {
        self.current_len
    }

    pub fn is_empty(&self) -> bool {
        self.current_len == 0
    }

    pub fn mark_changed(&mut self, v: VertexId) {
        if !std::mem::replace(&mut self.next[v as usize], true) {
            self.next_len += 1;
        }
    }

    pub fn next_len(&self) -> usize {
        self.next_len
    }

    /// Q <- Q', Q' <- {}.
    pub fn advance(&mut self) {
        std::mem::swap(&mut self.current, &mut self.next);
        self.current_len = self.next_len;
        self.next.iter_mut().for_each(|b| *b = false);
        self.next_len = 0;
    }
}

/// Behavior of one graph algorithm on the accelerator.
pub trait VertexProgram: Sync {
    type Value: Payload;

    fn name(&self) -> &'static str;
    fn op(&self) -> CombineOp;
    fn initial_states(&self, n: usize) -> Vec<Self::Value>;
    fn initial_frontier(&self, n: usize) -> Frontier;
    /// Update emitted along each out-edge of an active `u`.
    fn scatter(&self, u: VertexId, state: Self::Value) -> Self::Value;
    /// Starting point of `v`'s next state before updates are folded in.
    fn reset(&self, current: Self::Value) -> Self::Value;
    /// Every vertex scatters every iteration regardless of the frontier.
    fn all_active(&self) -> bool;
    /// Upper bound on iterations; frontier-driven programs also stop early
    /// once the frontier empties.
    fn max_iterations(&self, n: usize) -> usize;
    /// Pipeline stages added by the payload's arithmetic units.
    fn extra_pipeline_stages(&self) -> u64 {
        0
    }
    /// Nominal clock for throughput reporting.
    fn clock_mhz(&self) -> u64 {
        250
    }
    fn wrap_states(&self, states: Vec<Self::Value>) -> VertexStates;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bfs {
    pub root: VertexId,
}

impl VertexProgram for Bfs {
    type Value = u8;

    fn name(&self) -> &'static str {
        "bfs"
    }
    fn op(&self) -> CombineOp {
        CombineOp::Min
    }
    fn initial_states(&self, n: usize) -> Vec<u8> {
        let mut dis = vec![BFS_UNREACHED; n];
        dis[self.root as usize] = 0;
        dis
    }
    fn initial_frontier(&self, n: usize) -> Frontier {
        Frontier::single(n, self.root)
    }
    fn scatter(&self, _u: VertexId, dis: u8) -> u8 {
        dis.saturating_add(1)
    }
    fn reset(&self, current: u8) -> u8 {
        current
    }
    fn all_active(&self) -> bool {
        false
    }
    fn max_iterations(&self, n: usize) -> usize {
        n + 1
    }
    fn wrap_states(&self, states: Vec<u8>) -> VertexStates {
        VertexStates::Depth(states)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PageRank {
    pub epsilon: f32,
    pub iterations: usize,
    out_degrees: Vec<u32>,
}

impl PageRank {
    /// `g` is the destination-major graph the program will run on.
    pub fn new(epsilon: f32, iterations: usize, g: &Graph) -> Self {
        Self { epsilon, iterations, out_degrees: g.opposite_degrees() }
    }
}

impl VertexProgram for PageRank {
    type Value = f32;

    fn name(&self) -> &'static str {
        "pr"
    }
    fn op(&self) -> CombineOp {
        CombineOp::Add
    }
    fn initial_states(&self, n: usize) -> Vec<f32> {
        vec![1.0; n]
    }
    fn initial_frontier(&self, n: usize) -> Frontier {
        Frontier::all(n)
    }
    fn scatter(&self, u: VertexId, rank: f32) -> f32 {
        match self.out_degrees[u as usize] {
            0 => 0.0,
            d => rank / d as f32,
        }
    }
    fn reset(&self, _current: f32) -> f32 {
        self.epsilon
    }
    fn all_active(&self) -> bool {
        true
    }
    fn max_iterations(&self, _n: usize) -> usize {
        self.iterations
    }
    fn extra_pipeline_stages(&self) -> u64 {
        4
    }
    fn clock_mhz(&self) -> u64 {
        200
    }
    fn wrap_states(&self, states: Vec<f32>) -> VertexStates {
        VertexStates::Rank(states)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Wcc;

impl VertexProgram for Wcc {
    type Value = u32;

    fn name(&self) -> &'static str {
        "wcc"
    }
    fn op(&self) -> CombineOp {
        CombineOp::Min
    }
    fn initial_states(&self, n: usize) -> Vec<u32> {
        (0..n as u32).collect()
    }
    fn initial_frontier(&self, n: usize) -> Frontier {
        Frontier::all(n)
    }
    fn scatter(&self, _u: VertexId, label: u32) -> u32 {
        label
    }
    fn reset(&self, current: u32) -> u32 {
        current
    }
    fn all_active(&self) -> bool {
        false
    }
    fn max_iterations(&self, n: usize) -> usize {
        n + 1
    }
    fn wrap_states(&self, states: Vec<u32>) -> VertexStates {
        VertexStates::Label(states)
    }
}

/// Algorithm selection with its parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algo", rename_all = "kebab-case")]
pub enum AlgorithmSpec {
    Bfs { root: VertexId },
    #[serde(rename = "pr")]
    PageRank { epsilon: f32, iterations: usize },
    Wcc,
}

pub fn bfs_spec(root: VertexId) -> AlgorithmSpec {
    AlgorithmSpec::Bfs { root }
}

pub fn pagerank_spec(epsilon: f32, iterations: usize) -> Result<AlgorithmSpec, AlgorithmError> {
    if iterations == 0 {
        return Err(AlgorithmError::ZeroIterations);
    }
    if !epsilon.is_finite() {
        return Err(AlgorithmError::BadEpsilon(epsilon));
    }
    Ok(AlgorithmSpec::PageRank { epsilon, iterations })
}

pub fn wcc_spec() -> AlgorithmSpec {
    AlgorithmSpec::Wcc
}

/// Something to do with a concrete program.
pub trait ProgramVisitor {
    type Output;
    fn visit<P: VertexProgram>(self, program: &P, g: &Graph) -> Self::Output;
}

impl AlgorithmSpec {
    pub fn name(&self) -> &'static str {
        match self {
            AlgorithmSpec::Bfs { .. } => "bfs",
            AlgorithmSpec::PageRank { .. } => "pr",
            AlgorithmSpec::Wcc => "wcc",
        }
    }

    pub fn combine_op(&self) -> CombineOp {
        match self {
            AlgorithmSpec::PageRank { .. } => CombineOp::Add,
            _ => CombineOp::Min,
        }
    }

    pub fn payload_bytes(&self) -> usize {
        match self {
            AlgorithmSpec::Bfs { .. } => u8::BYTES,
            AlgorithmSpec::PageRank { .. } => f32::BYTES,
            AlgorithmSpec::Wcc => u32::BYTES,
        }
    }

    pub fn validate(&self, num_vertices: usize) -> Result<(), AlgorithmError> {
        match *self {
            AlgorithmSpec::Bfs { root } if root as usize >= num_vertices => {
                Err(AlgorithmError::RootOutOfRange { root, num_vertices })
            }
            AlgorithmSpec::PageRank { epsilon, iterations } => pagerank_spec(epsilon, iterations).map(|_| ()),
            _ => Ok(()),
        }
    }

    /// The edge set the algorithm runs on: WCC ignores edge direction.
    pub fn prepare_graph<'a>(&self, g: &'a Graph) -> Cow<'a, Graph> {
        match self {
            AlgorithmSpec::Wcc => Cow::Owned(g.to_in_edges().symmetrized()),
            _ if g.direction() != crate::graph::Direction::InEdges => Cow::Owned(g.to_in_edges()),
            _ => Cow::Borrowed(g),
        }
    }

    /// Instantiates the program for `g` (already prepared) and hands it to
    /// `visitor`.
    pub fn dispatch<V: ProgramVisitor>(&self, g: &Graph, visitor: V) -> Result<V::Output, AlgorithmError> {
        self.validate(g.num_vertices())?;
        Ok(match *self {
            AlgorithmSpec::Bfs { root } => visitor.visit(&Bfs { root }, g),
            AlgorithmSpec::PageRank { epsilon, iterations } => {
                visitor.visit(&PageRank::new(epsilon, iterations, g), g)
            }
            AlgorithmSpec::Wcc => visitor.visit(&Wcc, g),
        })
    }
}

/// Final per-vertex states of any program.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "values")]
pub enum VertexStates {
    Depth(Vec<u8>),
    Rank(Vec<f32>),
    Label(Vec<u32>),
}

impl VertexStates {
    pub fn len(&self) -> usize {
        match self {
            VertexStates::Depth(v) => v.len(),
            VertexStates::Rank(v) => v.len(),
            VertexStates::Label(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Largest relative difference between two rank vectors, or exact
    /// comparison for integer states (0.0 when equal, infinity otherwise).
    pub fn max_relative_error(&self, other: &VertexStates) -> f64 {
        match (self, other) {
            (VertexStates::Rank(a), VertexStates::Rank(b)) if a.len() == b.len() => a
                .iter()
                .zip(b)
                .map(|(&x, &y)| {
                    let scale = x.abs().max(y.abs()).max(f32::MIN_POSITIVE) as f64;
                    (x as f64 - y as f64).abs() / scale
                })
                .fold(0.0, f64::max),
            _ if self == other => 0.0,
            _ => f64::INFINITY,
        }
    }
}

struct SerialRun;

impl ProgramVisitor for SerialRun {
    type Output = (VertexStates, usize);

    fn visit<P: VertexProgram>(self, p: &P, g: &Graph) -> Self::Output {
        let (states, iterations) = serial_run(p, g);
        (p.wrap_states(states), iterations)
    }
}

/// Runs `p` one edge at a time in edge order. Returns the final states and
/// the number of iterations executed.
pub fn serial_run<P: VertexProgram>(p: &P, g: &Graph) -> (Vec<P::Value>, usize) {
    let n = g.num_vertices();
    let op = p.op();
    let mut cur = p.initial_states(n);
    let mut frontier = p.initial_frontier(n);
    let mut iterations = 0;
    while iterations < p.max_iterations(n) && (p.all_active() || !frontier.is_empty()) {
        let mut next: Vec<P::Value> = cur.iter().map(|&x| p.reset(x)).collect();
        for v in g.vertices() {
            for &u in g.neighbors(v) {
                if p.all_active() || frontier.is_active(u) {
                    next[v as usize] = op.apply(next[v as usize], p.scatter(u, cur[u as usize]));
                }
            }
        }
        for v in g.vertices() {
            if next[v as usize] != cur[v as usize] {
                frontier.mark_changed(v);
            }
        }
        frontier.advance();
        cur = next;
        iterations += 1;
    }
    (cur, iterations)
}

/// Ground-truth final states for `spec` on `g`.
pub fn serial_reference(spec: &AlgorithmSpec, g: &Graph) -> Result<VertexStates, AlgorithmError> {
    let g = spec.prepare_graph(g);
    spec.dispatch(&g, SerialRun).map(|(states, _)| states)
}
