//! Cycle loop of the six-stage accelerator pipeline.
//!
//! Stage mapping: P1/P2 vertex units and scheduling, P3 edge fetch and
//! source-vertex reads through the banked memory, P4 accumulation, P5
//! crossbar into the destination accumulators, P6 write-back.
//!
//! Iterations are synchronous: sources read the state as of the start of
//! the iteration and updates fold into a separate next-state buffer.

mod engine;
mod sweep;

pub use sweep::{
    ablation_sweep, normalize_speedups, partition_sweep, pipeline_sweep, serialization_overhead, OverheadReport,
    SweepPoint, SweepRow,
};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::accumulator::AccumulatorError;
use crate::algorithms::{AlgorithmError, AlgorithmSpec, ProgramVisitor, VertexProgram, VertexStates};
use crate::graph::Graph;
use crate::memory::{MemoryError, MemoryMode};
use crate::preprocess::{partition_by_destination, rearrange_edges, PreprocessError, RearrangeConfig};

use engine::Engine;

pub const STATS_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(
        "{partitions} partition(s) need {required} bytes of on-chip vertex memory but only {available} are \
         configured; use at least {min_partitions} partitions"
    )]
    Capacity { partitions: usize, required: usize, available: usize, min_partitions: usize },
    #[error(transparent)]
    Algorithm(#[from] AlgorithmError),
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
    #[error(transparent)]
    Memory(#[from] MemoryError),
    #[error(transparent)]
    Accumulator(#[from] AccumulatorError),
}

/// Pipeline variants. Each configuration adds one feature to the previous.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Serialized atomic updates, one vertex per cycle.
    Baseline,
    /// Source-vertex accumulator merges a batch's updates in one pass.
    Cfg1,
    /// Adds destination accumulators that merge results across batches.
    Cfg2,
    /// Adds degree-aware scheduling of several vertices per cycle.
    Cfg3,
    /// Adds bank-aware edge rearranging.
    Cfg4,
    /// Adds out-of-order vertex memory access with a reorder buffer.
    #[default]
    Cfg5,
}

impl Mode {
    pub const ALL: [Mode; 6] = [Mode::Baseline, Mode::Cfg1, Mode::Cfg2, Mode::Cfg3, Mode::Cfg4, Mode::Cfg5];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Baseline => "baseline",
            Mode::Cfg1 => "cfg1",
            Mode::Cfg2 => "cfg2",
            Mode::Cfg3 => "cfg3",
            Mode::Cfg4 => "cfg4",
            Mode::Cfg5 => "cfg5",
        }
    }

    /// Updates to one vertex are serialized in the update stage.
    pub fn serialized_updates(self) -> bool {
        self == Mode::Baseline
    }

    /// A vertex may not re-enter the pipeline while a write-back for it is
    /// still outstanding.
    pub fn atomic_protection(self) -> bool {
        self <= Mode::Cfg1
    }

    pub fn dest_accumulator(self) -> bool {
        self >= Mode::Cfg2
    }

    pub fn degree_aware(self) -> bool {
        self >= Mode::Cfg3
    }

    pub fn rearrange(self) -> bool {
        self >= Mode::Cfg4
    }

    pub fn memory_mode(self) -> MemoryMode {
        if self >= Mode::Cfg5 {
            MemoryMode::OutOfOrder
        } else {
            MemoryMode::Blocking
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown mode '{s}', expected one of baseline, cfg1..cfg5"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Vertex units `N`; CFG1 and CFG2 use one.
    pub vertex_pipelines: usize,
    /// Vertex units of the serialized baseline.
    pub baseline_vertex_pipelines: usize,
    /// Edges per cacheline `W`.
    pub edge_lanes: usize,
    /// Vertex memory banks `P`.
    pub banks: usize,
    pub bank_queue_depth: usize,
    /// Reorder buffer slots `m`.
    pub reorder_capacity: usize,
    /// Results each destination-accumulator replica can buffer.
    pub crossbar_fifo_depth: usize,
    pub dram_latency: u64,
    /// Off-chip edge lines buffered ahead of the scheduler.
    pub edge_prefetch_lines: usize,
    pub onchip_bytes: usize,
    /// Reporting clock; defaults to the algorithm's nominal clock.
    pub clock_mhz: Option<u64>,
    pub mode: Mode,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            vertex_pipelines: 8,
            baseline_vertex_pipelines: 1,
            edge_lanes: 16,
            banks: 16,
            bank_queue_depth: 16,
            reorder_capacity: 16,
            crossbar_fifo_depth: 4,
            dram_latency: 40,
            edge_prefetch_lines: 64,
            onchip_bytes: 4 << 20,
            clock_mhz: None,
            mode: Mode::default(),
        }
    }
}

impl PipelineConfig {
    pub fn with_mode(&self, mode: Mode) -> Self {
        Self { mode, ..self.clone() }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let pow2 = |name: &str, v: usize| {
            if v == 0 || !v.is_power_of_two() {
                Err(SimError::Config(format!("{name} must be a power of two, got {v}")))
            } else {
                Ok(())
            }
        };
        pow2("banks", self.banks)?;
        pow2("reorder_capacity", self.reorder_capacity)?;
        pow2("edge_lanes", self.edge_lanes)?;
        if self.edge_lanes > crate::memory::MAX_LANES {
            return Err(SimError::Config(format!("edge_lanes must be at most {}", crate::memory::MAX_LANES)));
        }
        for (name, v) in [
            ("vertex_pipelines", self.vertex_pipelines),
            ("baseline_vertex_pipelines", self.baseline_vertex_pipelines),
            ("bank_queue_depth", self.bank_queue_depth),
            ("crossbar_fifo_depth", self.crossbar_fifo_depth),
            ("edge_prefetch_lines", self.edge_prefetch_lines),
        ] {
            if v == 0 {
                return Err(SimError::Config(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }

    /// Vertex units actually instantiated for the configured mode.
    pub fn effective_pipelines(&self) -> usize {
        match self.mode {
            Mode::Baseline => self.baseline_vertex_pipelines,
            Mode::Cfg1 | Mode::Cfg2 => 1,
            _ => self.vertex_pipelines,
        }
    }
}

/// Cycles in which the front end could not issue a new cacheline, by cause.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stalls {
    pub atomic: u64,
    pub bank_conflict: u64,
    pub reorder: u64,
    pub scheduler: u64,
    pub crossbar: u64,
    pub dram: u64,
}

impl Stalls {
    pub fn total(&self) -> u64 {
        self.atomic + self.bank_conflict + self.reorder + self.scheduler + self.crossbar + self.dram
    }

    /// Largest cause, ties broken in field order.
    pub fn top(&self) -> Option<(&'static str, u64)> {
        [
            ("atomic", self.atomic),
            ("bank_conflict", self.bank_conflict),
            ("reorder", self.reorder),
            ("scheduler", self.scheduler),
            ("crossbar", self.crossbar),
            ("dram", self.dram),
        ]
        .into_iter()
        .filter(|&(_, c)| c > 0)
        .fold(None, |best: Option<(&str, u64)>, cur| match best {
            Some(b) if b.1 >= cur.1 => Some(b),
            _ => Some(cur),
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SimStats {
    pub schema_version: u32,
    pub algorithm: String,
    pub mode: Mode,
    pub vertex_pipelines: usize,
    pub cycles: u64,
    pub edges_traversed: u64,
    pub teps: f64,
    pub clock_mhz: u64,
    pub stalls: Stalls,
    pub iterations: u64,
    pub partitions: usize,
    /// Sub-iterations executed per partition.
    pub sub_iterations: Vec<u64>,
    /// Cycles in which the front end issued the first slice of a cacheline.
    pub productive_cycles: u64,
    /// Cycles after the last slice was issued until the pipeline emptied.
    pub drain_cycles: u64,
    /// Cycles spent streaming vertex data between on-chip and off-chip
    /// memory; included in `stalls.dram`.
    pub vertex_load_cycles: u64,
    /// Cycles the update stage was occupied.
    pub update_stage_cycles: u64,
    /// Cycles with at least one source read waiting for a bank.
    pub memory_busy_cycles: u64,
    /// Conflict-free lower bound on `memory_busy_cycles`.
    pub memory_ideal_cycles: u64,
    pub lanes_consumed: u64,
    pub slices: u64,
    pub lines: u64,
    pub write_backs: u64,
    pub write_port_conflicts: u64,
    pub crossbar_collisions: u64,
    pub reorder_collisions: u64,
    pub scheduler_extra_cycles: u64,
}

impl SimStats {
    pub fn gteps(&self) -> f64 {
        self.teps / 1e9
    }

    /// Vertex-memory cycles beyond the conflict-free ideal, as a fraction
    /// of the ideal.
    pub fn memory_overhead(&self) -> f64 {
        if self.memory_ideal_cycles == 0 {
            0.0
        } else {
            self.memory_busy_cycles as f64 / self.memory_ideal_cycles as f64 - 1.0
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimOutput {
    pub states: VertexStates,
    pub stats: SimStats,
}

/// Simulates `spec` on `g` split into `partitions` destination ranges.
pub fn run(
    g: &Graph,
    spec: &AlgorithmSpec,
    cfg: &PipelineConfig,
    partitions: usize,
) -> Result<SimOutput, SimError> {
    cfg.validate()?;
    let n = g.num_vertices();
    if partitions == 0 || partitions > n {
        return Err(PreprocessError::BadPartitionCount { k: partitions, num_vertices: n }.into());
    }
    let bytes = spec.payload_bytes();
    let required = n.div_ceil(partitions) * bytes;
    if required > cfg.onchip_bytes {
        let per_part = (cfg.onchip_bytes / bytes).max(1);
        return Err(SimError::Capacity {
            partitions,
            required,
            available: cfg.onchip_bytes,
            min_partitions: n.div_ceil(per_part),
        });
    }
    let g = spec.prepare_graph(g);
    spec.dispatch(&g, Simulate { cfg, partitions })?
}

/// Serialized-atomic baseline with the given memory parameters.
pub fn run_serialized_baseline(g: &Graph, spec: &AlgorithmSpec, cfg: &PipelineConfig) -> Result<SimStats, SimError> {
    run(g, spec, &cfg.with_mode(Mode::Baseline), 1).map(|o| o.stats)
}

struct Simulate<'c> {
    cfg: &'c PipelineConfig,
    partitions: usize,
}

impl ProgramVisitor for Simulate<'_> {
    type Output = Result<SimOutput, SimError>;

    fn visit<P: VertexProgram>(self, p: &P, g: &Graph) -> Self::Output {
        let cfg = self.cfg;
        let n = g.num_vertices();
        let mut parts = partition_by_destination(g, self.partitions)?;
        if cfg.mode.rearrange() {
            let rc = RearrangeConfig::new(cfg.banks)?;
            for part in &mut parts {
                part.sub_graph = rearrange_edges(&part.sub_graph, rc)?;
            }
        }

        let mut cur = p.initial_states(n);
        let mut frontier = p.initial_frontier(n);
        let mut engine = Engine::new(p, cfg, &cur)?;
        let line_bytes = crate::memory::CACHELINE_BITS / 8;
        let bytes = <P::Value as crate::accumulator::Payload>::BYTES;
        let vertex_lines = |count: usize| (count * bytes).div_ceil(line_bytes) as u64;

        let mut stats = SimStats {
            schema_version: STATS_SCHEMA_VERSION,
            algorithm: p.name().to_string(),
            mode: cfg.mode,
            vertex_pipelines: cfg.effective_pipelines(),
            partitions: self.partitions,
            sub_iterations: vec![0; self.partitions],
            clock_mhz: cfg.clock_mhz.unwrap_or_else(|| p.clock_mhz()),
            ..SimStats::default()
        };
        let mut cycles = 0u64;
        let load = |stats: &mut SimStats, lines: u64| {
            let c = lines + cfg.dram_latency;
            stats.vertex_load_cycles += c;
            stats.stalls.dram += c;
            c
        };
        if self.partitions == 1 {
            cycles += load(&mut stats, vertex_lines(n));
        }

        let mut iterations = 0u64;
        while (iterations as usize) < p.max_iterations(n) && (p.all_active() || !frontier.is_empty()) {
            engine.begin_iteration(&cur, &frontier);
            for part in &parts {
                if self.partitions > 1 {
                    let range_len = (part.vertex_range.end - part.vertex_range.start) as usize;
                    cycles += load(&mut stats, vertex_lines(n) + vertex_lines(range_len));
                }
                cycles += engine.run_pass(&part.sub_graph, part.vertex_range.clone());
                stats.sub_iterations[part.part_index] += 1;
                stats.edges_traversed += part.sub_graph.num_edges() as u64;
            }
            let next = engine.next_states();
            for (v, (a, b)) in next.iter().zip(&cur).enumerate() {
                if a != b {
                    frontier.mark_changed(v as u32);
                }
            }
            frontier.advance();
            cur = next;
            iterations += 1;
        }

        engine.counters.fill(&mut stats);
        stats.cycles = cycles;
        stats.iterations = iterations;
        stats.teps = if cycles == 0 {
            0.0
        } else {
            stats.edges_traversed as f64 * stats.clock_mhz as f64 * 1e6 / cycles as f64
        };
        debug_assert_eq!(stats.productive_cycles + stats.stalls.total() + stats.drain_cycles, stats.cycles);
        Ok(SimOutput { states: p.wrap_states(cur), stats })
    }
}
