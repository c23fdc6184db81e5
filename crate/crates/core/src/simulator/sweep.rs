use serde::{Deserialize, Serialize};

use super::{run, Mode, PipelineConfig, SimError, SimStats};
use crate::algorithms::AlgorithmSpec;
use crate::graph::Graph;

/// One configuration of a sweep.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub label: String,
    pub mode: Mode,
    pub vertex_pipelines: usize,
    pub partitions: usize,
}

impl SweepPoint {
    pub fn modes(modes: &[Mode], cfg: &PipelineConfig) -> Vec<SweepPoint> {
        modes
            .iter()
            .map(|&mode| SweepPoint {
                label: mode.to_string(),
                mode,
                vertex_pipelines: cfg.with_mode(mode).effective_pipelines(),
                partitions: 1,
            })
            .collect()
    }

    /// Vertex-unit counts on the full design.
    pub fn pipelines(counts: &[usize]) -> Vec<SweepPoint> {
        counts
            .iter()
            .map(|&n| SweepPoint { label: format!("n{n}"), mode: Mode::Cfg5, vertex_pipelines: n, partitions: 1 })
            .collect()
    }

    pub fn partitions(counts: &[usize], cfg: &PipelineConfig) -> Vec<SweepPoint> {
        counts
            .iter()
            .map(|&k| SweepPoint {
                label: format!("k{k}"),
                mode: cfg.mode,
                vertex_pipelines: cfg.effective_pipelines(),
                partitions: k,
            })
            .collect()
    }

    pub fn config(&self, base: &PipelineConfig) -> PipelineConfig {
        let mut cfg = base.with_mode(self.mode);
        match self.mode {
            Mode::Baseline => cfg.baseline_vertex_pipelines = self.vertex_pipelines,
            Mode::Cfg1 | Mode::Cfg2 => {}
            _ => cfg.vertex_pipelines = self.vertex_pipelines,
        }
        cfg
    }

    pub fn run(&self, g: &Graph, spec: &AlgorithmSpec, base: &PipelineConfig) -> Result<SweepRow, SimError> {
        let stats = run(g, spec, &self.config(base), self.partitions)?.stats;
        Ok(SweepRow { point: self.clone(), speedup: 1.0, stats })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub point: SweepPoint,
    /// Cycles of the first row divided by this row's cycles.
    pub speedup: f64,
    pub stats: SimStats,
}

pub fn normalize_speedups(rows: &mut [SweepRow]) {
    let Some(reference) = rows.first().map(|r| r.stats.cycles) else { return };
    for row in rows {
        row.speedup = if row.stats.cycles == 0 { 1.0 } else { reference as f64 / row.stats.cycles as f64 };
    }
}

fn run_all(points: &[SweepPoint], g: &Graph, spec: &AlgorithmSpec, cfg: &PipelineConfig) -> Result<Vec<SweepRow>, SimError> {
    let mut rows = points.iter().map(|p| p.run(g, spec, cfg)).collect::<Result<Vec<_>, _>>()?;
    normalize_speedups(&mut rows);
    Ok(rows)
}

/// Runs every mode with speedups relative to the first.
pub fn ablation_sweep(
    g: &Graph,
    spec: &AlgorithmSpec,
    cfg: &PipelineConfig,
    modes: &[Mode],
) -> Result<Vec<SweepRow>, SimError> {
    run_all(&SweepPoint::modes(modes, cfg), g, spec, cfg)
}

pub fn pipeline_sweep(
    g: &Graph,
    spec: &AlgorithmSpec,
    cfg: &PipelineConfig,
    counts: &[usize],
) -> Result<Vec<SweepRow>, SimError> {
    run_all(&SweepPoint::pipelines(counts), g, spec, cfg)
}

pub fn partition_sweep(
    g: &Graph,
    spec: &AlgorithmSpec,
    cfg: &PipelineConfig,
    counts: &[usize],
) -> Result<Vec<SweepRow>, SimError> {
    run_all(&SweepPoint::partitions(counts, cfg), g, spec, cfg)
}

/// Update-stage cost of serialized atomics against a fully parallel
/// accumulator of the same width.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverheadReport {
    pub serialized_update_cycles: u64,
    pub parallel_update_cycles: u64,
    pub serialized_cycles: u64,
    pub parallel_cycles: u64,
    /// `(serialized - parallel) / parallel` update-stage cycles.
    pub overhead: f64,
}

pub fn serialization_overhead(
    g: &Graph,
    spec: &AlgorithmSpec,
    cfg: &PipelineConfig,
) -> Result<OverheadReport, SimError> {
    let width = cfg.edge_lanes;
    let serial = PipelineConfig { baseline_vertex_pipelines: width, ..cfg.with_mode(Mode::Baseline) };
    let parallel = PipelineConfig { vertex_pipelines: width, ..cfg.with_mode(Mode::Cfg3) };
    let s = run(g, spec, &serial, 1)?.stats;
    let p = run(g, spec, &parallel, 1)?.stats;
    Ok(OverheadReport {
        serialized_update_cycles: s.update_stage_cycles,
        parallel_update_cycles: p.update_stage_cycles,
        serialized_cycles: s.cycles,
        parallel_cycles: p.cycles,
        overhead: (s.update_stage_cycles as f64 - p.update_stage_cycles as f64) / p.update_stage_cycles.max(1) as f64,
    })
}
