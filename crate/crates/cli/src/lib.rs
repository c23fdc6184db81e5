//! Command-line front end: dataset preparation, single runs, and sweeps.

pub mod error;
pub mod manifest;

use std::fs;
use std::path::{Path, PathBuf};

use accumsim_core::algorithms::{
    bfs_spec, pagerank_spec, wcc_spec, AlgorithmSpec, DEFAULT_EPSILON, DEFAULT_PR_ITERATIONS,
};
use accumsim_core::graph::{self, Graph, VertexId, BINARY_MAGIC};
use accumsim_core::preprocess::{partition_by_destination, rearrange_edges, RearrangeConfig};
use accumsim_core::simulator::{self, normalize_speedups, Mode, PipelineConfig, SimStats, SweepPoint, SweepRow};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

pub use error::CliError;
use manifest::{file_digest, write_json, write_output, FileEntry, RunManifest};

pub const THREADS_ENV: &str = "ACCUMSIM_THREADS";

#[derive(Debug, Parser)]
#[command(name = "accumsim", version, about = "Cycle-level graph accelerator simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert an edge list to the binary format, optionally rearranged and
    /// partitioned.
    Prepare(PrepareArgs),
    /// Simulate one algorithm on one graph.
    Run(RunArgs),
    /// Run a family of configurations and tabulate speedups.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct PrepareArgs {
    /// Edge list ("src dst" per line, '#' comments).
    pub input: PathBuf,
    /// Treat every line as an undirected edge.
    #[arg(long)]
    pub undirected: bool,
    /// Rearrange each vertex's edges for this many memory banks.
    #[arg(long, value_name = "P")]
    pub rearrange: Option<usize>,
    /// Also write this many destination-range partitions.
    #[arg(long, value_name = "K")]
    pub partitions: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    Bfs,
    Pr,
    Wcc,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    /// Binary graph file or edge list (directed).
    pub graph: PathBuf,
    #[arg(long, value_enum)]
    pub algo: Algo,
    /// JSON pipeline configuration; flags below override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    pub vertex_pipelines: Option<usize>,
    #[arg(long, value_name = "P")]
    pub banks: Option<usize>,
    #[arg(long, value_name = "M")]
    pub reorder: Option<usize>,
    #[arg(long, value_name = "CYCLES")]
    pub dram_latency: Option<u64>,
    /// BFS root; chosen from --seed when omitted.
    #[arg(long)]
    pub root: Option<VertexId>,
    #[arg(long)]
    pub epsilon: Option<f32>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub sim: SimArgs,
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<Mode>,
    #[arg(long, value_name = "K", default_value_t = 1)]
    pub partitions: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepKind {
    Modes,
    Pipelines,
    Partitions,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub sim: SimArgs,
    #[arg(long, value_enum)]
    pub sweep: SweepKind,
    /// Mode for the partition sweep.
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<Mode>,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse()
}

pub const PIPELINE_SWEEP: [usize; 4] = [1, 2, 4, 8];
pub const PARTITION_SWEEP: [usize; 3] = [1, 2, 4];

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Prepare(a) => cmd_prepare(&a),
        Command::Run(a) => cmd_run(&a).map(|summary| println!("{summary}")),
        Command::Sweep(a) => cmd_sweep(&a).map(|summary| println!("{summary}")),
    }
}

/// Reads a binary graph, or an edge list when the magic is absent.
pub fn load_graph(path: &Path) -> Result<Graph, CliError> {
    let bytes = fs::read(path).map_err(CliError::io(path))?;
    let graph_err = |source| CliError::Graph { path: path.to_path_buf(), source };
    if bytes.starts_with(BINARY_MAGIC) {
        graph::read_binary(bytes.as_slice()).map_err(graph_err)
    } else {
        let text = String::from_utf8(bytes).map_err(|e| CliError::Graph {
            path: path.to_path_buf(),
            source: graph::GraphError::Format(e.to_string()),
        })?;
        graph::parse_edge_list(&text, true).map_err(graph_err)
    }
}

fn write_graph(dir: &Path, name: &str, g: &Graph) -> Result<FileEntry, CliError> {
    let mut bytes = Vec::new();
    graph::write_binary(g, &mut bytes).map_err(|source| CliError::Graph { path: dir.join(name), source })?;
    write_output(dir, name, &bytes)
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(CliError::io(dir))
}

#[derive(Debug, Serialize)]
struct PrepareConfig {
    undirected: bool,
    rearrange: Option<usize>,
    partitions: Vec<PartitionEntry>,
    num_vertices: usize,
    num_edges: usize,
}

#[derive(Debug, Serialize)]
struct PartitionEntry {
    part_index: usize,
    vertex_range: [VertexId; 2],
    num_edges: usize,
    path: PathBuf,
}

fn same_neighbor_multisets(a: &Graph, b: &Graph) -> Result<(), CliError> {
    for v in a.vertices() {
        let mut x = a.neighbors(v).to_vec();
        let mut y = b.neighbors(v).to_vec();
        x.sort_unstable();
        y.sort_unstable();
        if x != y {
            return Err(CliError::RearrangeCheck(v));
        }
    }
    Ok(())
}

pub fn cmd_prepare(a: &PrepareArgs) -> Result<(), CliError> {
    if a.partitions == Some(0) {
        return Err(CliError::Usage("--partitions must be at least 1".into()));
    }
    let mut g = graph::load_edge_list(&a.input, !a.undirected)
        .map_err(|source| CliError::Graph { path: a.input.clone(), source })?;
    if let Some(p) = a.rearrange {
        let rearranged = rearrange_edges(&g, RearrangeConfig::new(p)?)?;
        same_neighbor_multisets(&g, &rearranged)?;
        g = rearranged;
    }
    create_dir(&a.out)?;
    let mut outputs = vec![write_graph(&a.out, "graph.agrf", &g)?];
    let mut partitions = Vec::new();
    if let Some(k) = a.partitions.filter(|&k| k > 1) {
        for part in partition_by_destination(&g, k)? {
            let name = format!("part-{:03}.agrf", part.part_index);
            outputs.push(write_graph(&a.out, &name, &part.sub_graph)?);
            partitions.push(PartitionEntry {
                part_index: part.part_index,
                vertex_range: [part.vertex_range.start, part.vertex_range.end],
                num_edges: part.sub_graph.num_edges(),
                path: name.into(),
            });
        }
    }
    let input = FileEntry { path: a.input.clone(), sha256: file_digest(&a.input)? };
    let config = PrepareConfig {
        undirected: a.undirected,
        rearrange: a.rearrange,
        partitions,
        num_vertices: g.num_vertices(),
        num_edges: g.num_edges(),
    };
    write_json(&a.out, "manifest.json", &RunManifest::new("prepare", input, config, outputs))?;
    Ok(())
}

/// Everything that determines a simulation's outcome.
#[derive(Clone, Debug, Serialize)]
pub struct ResolvedRun {
    pub algorithm: AlgorithmSpec,
    pub pipeline: PipelineConfig,
    pub partitions: usize,
    pub seed: u64,
}

fn resolve(sim: &SimArgs, mode: Option<Mode>, g: &Graph) -> Result<(AlgorithmSpec, PipelineConfig), CliError> {
    let mut cfg = match &sim.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(CliError::io(path))?;
            serde_json::from_str(&text).map_err(|source| CliError::Config { path: path.clone(), source })?
        }
        None => PipelineConfig::default(),
    };
    if let Some(m) = mode {
        cfg.mode = m;
    }
    if let Some(n) = sim.vertex_pipelines {
        cfg.vertex_pipelines = n;
    }
    if let Some(p) = sim.banks {
        cfg.banks = p;
    }
    if let Some(m) = sim.reorder {
        cfg.reorder_capacity = m;
    }
    if let Some(l) = sim.dram_latency {
        cfg.dram_latency = l;
    }
    cfg.validate()?;

    let reject = |flag: &str| Err(CliError::Usage(format!("{flag} does not apply to --algo {:?}", sim.algo).to_lowercase()));
    let spec = match sim.algo {
        Algo::Bfs => {
            if sim.epsilon.is_some() {
                return reject("--epsilon");
            }
            if sim.iterations.is_some() {
                return reject("--iterations");
            }
            bfs_spec(match sim.root {
                Some(r) => r,
                None => pick_root(g, sim.seed),
            })
        }
        Algo::Pr => {
            if sim.root.is_some() {
                return reject("--root");
            }
            pagerank_spec(
                sim.epsilon.unwrap_or(DEFAULT_EPSILON),
                sim.iterations.unwrap_or(DEFAULT_PR_ITERATIONS),
            )?
        }
        Algo::Wcc => {
            if sim.root.is_some() {
                return reject("--root");
            }
            if sim.epsilon.is_some() {
                return reject("--epsilon");
            }
            if sim.iterations.is_some() {
                return reject("--iterations");
            }
            wcc_spec()
        }
    };
    spec.validate(g.num_vertices())?;
    Ok((spec, cfg))
}

/// A seeded choice among vertices that have outgoing edges.
pub fn pick_root(g: &Graph, seed: u64) -> VertexId {
    let in_edges = g.to_in_edges();
    let out_degree = in_edges.opposite_degrees();
    let sources: Vec<VertexId> = (0..g.num_vertices() as VertexId).filter(|&v| out_degree[v as usize] > 0).collect();
    *sources.choose(&mut ChaCha8Rng::seed_from_u64(seed)).unwrap_or(&0)
}

#[derive(Debug, Serialize)]
struct StatsRow<'a> {
    algorithm: &'a str,
    mode: Mode,
    vertex_pipelines: usize,
    partitions: usize,
    iterations: u64,
    cycles: u64,
    edges_traversed: u64,
    teps: f64,
    stall_atomic: u64,
    stall_bank_conflict: u64,
    stall_reorder: u64,
    stall_scheduler: u64,
    stall_crossbar: u64,
    stall_dram: u64,
    productive_cycles: u64,
    drain_cycles: u64,
}

impl<'a> From<&'a SimStats> for StatsRow<'a> {
    fn from(s: &'a SimStats) -> Self {
        Self {
            algorithm: &s.algorithm,
            mode: s.mode,
            vertex_pipelines: s.vertex_pipelines,
            partitions: s.partitions,
            iterations: s.iterations,
            cycles: s.cycles,
            edges_traversed: s.edges_traversed,
            teps: s.teps,
            stall_atomic: s.stalls.atomic,
            stall_bank_conflict: s.stalls.bank_conflict,
            stall_reorder: s.stalls.reorder,
            stall_scheduler: s.stalls.scheduler,
            stall_crossbar: s.stalls.crossbar,
            stall_dram: s.stalls.dram,
            productive_cycles: s.productive_cycles,
            drain_cycles: s.drain_cycles,
        }
    }
}

fn to_csv<T: Serialize>(rows: impl IntoIterator<Item = T>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| CliError::Output { path: "csv".into(), message: e.to_string() })?;
    }
    w.into_inner().map_err(|e| CliError::Output { path: "csv".into(), message: e.to_string() })
}

pub fn summary_line(s: &SimStats) -> String {
    let top = s.stalls.top().map_or("none".to_string(), |(name, c)| format!("{name} ({c} cycles)"));
    format!("cycles={} gteps={:.4} top_stall={}", s.cycles, s.gteps(), top)
}

pub fn cmd_run(a: &RunArgs) -> Result<String, CliError> {
    let g = load_graph(&a.sim.graph)?;
    let (spec, cfg) = resolve(&a.sim, a.mode, &g)?;
    let out = simulator::run(&g, &spec, &cfg, a.partitions)?;
    create_dir(&a.sim.out)?;
    let outputs = vec![
        write_json(&a.sim.out, "stats.json", &out.stats)?,
        write_output(&a.sim.out, "stats.csv", &to_csv([StatsRow::from(&out.stats)])?)?,
        write_json(&a.sim.out, "states.json", &out.states)?,
    ];
    let resolved = ResolvedRun { algorithm: spec, pipeline: cfg, partitions: a.partitions, seed: a.sim.seed };
    let input = FileEntry { path: a.sim.graph.clone(), sha256: file_digest(&a.sim.graph)? };
    write_json(&a.sim.out, "manifest.json", &RunManifest::new("run", input, resolved, outputs))?;
    Ok(summary_line(&out.stats))
}

#[derive(Debug, Serialize)]
struct SweepCsvRow<'a> {
    label: &'a str,
    mode: Mode,
    vertex_pipelines: usize,
    partitions: usize,
    cycles: u64,
    edges_traversed: u64,
    teps: f64,
    speedup: f64,
    stall_atomic: u64,
    stall_bank_conflict: u64,
    stall_reorder: u64,
    stall_scheduler: u64,
    stall_crossbar: u64,
    stall_dram: u64,
}

#[derive(Debug, Serialize)]
struct PlotData<'a> {
    sweep: SweepKind,
    algorithm: &'a str,
    labels: Vec<&'a str>,
    cycles: Vec<u64>,
    speedup: Vec<f64>,
    gteps: Vec<f64>,
}

/// Worker pool honoring the thread cap in the environment.
pub fn sweep_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .parse()
            .map_err(|_| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got '{v}'")))?;
        builder = builder.num_threads(n.max(1));
    }
    builder.build().map_err(|e| CliError::Usage(e.to_string()))
}

pub fn cmd_sweep(a: &SweepArgs) -> Result<String, CliError> {
    let g = load_graph(&a.sim.graph)?;
    let (spec, mut cfg) = resolve(&a.sim, a.mode, &g)?;
    let points = match a.sweep {
        SweepKind::Modes => SweepPoint::modes(&Mode::ALL, &cfg),
        SweepKind::Pipelines => SweepPoint::pipelines(&PIPELINE_SWEEP),
        SweepKind::Partitions => {
            // Make room for the unpartitioned point.
            cfg.onchip_bytes = cfg.onchip_bytes.max(g.num_vertices() * spec.payload_bytes());
            SweepPoint::partitions(&PARTITION_SWEEP, &cfg)
        }
    };
    let pool = sweep_pool()?;
    let mut rows: Vec<SweepRow> =
        pool.install(|| points.par_iter().map(|p| p.run(&g, &spec, &cfg)).collect::<Result<_, _>>())?;
    normalize_speedups(&mut rows);

    create_dir(&a.sim.out)?;
    let csv_rows = rows.iter().map(|r| SweepCsvRow {
        label: &r.point.label,
        mode: r.point.mode,
        vertex_pipelines: r.point.vertex_pipelines,
        partitions: r.point.partitions,
        cycles: r.stats.cycles,
        edges_traversed: r.stats.edges_traversed,
        teps: r.stats.teps,
        speedup: r.speedup,
        stall_atomic: r.stats.stalls.atomic,
        stall_bank_conflict: r.stats.stalls.bank_conflict,
        stall_reorder: r.stats.stalls.reorder,
        stall_scheduler: r.stats.stalls.scheduler,
        stall_crossbar: r.stats.stalls.crossbar,
        stall_dram: r.stats.stalls.dram,
    });
    let plot = PlotData {
        sweep: a.sweep,
        algorithm: spec.name(),
        labels: rows.iter().map(|r| r.point.label.as_str()).collect(),
        cycles: rows.iter().map(|r| r.stats.cycles).collect(),
        speedup: rows.iter().map(|r| r.speedup).collect(),
        gteps: rows.iter().map(|r| r.stats.gteps()).collect(),
    };
    let outputs = vec![
        write_output(&a.sim.out, "sweep.csv", &to_csv(csv_rows)?)?,
        write_json(&a.sim.out, "plot.json", &plot)?,
    ];
    let resolved = ResolvedRun { algorithm: spec, pipeline: cfg, partitions: 1, seed: a.sim.seed };
    let input = FileEntry { path: a.sim.graph.clone(), sha256: file_digest(&a.sim.graph)? };
    write_json(&a.sim.out, "manifest.json", &RunManifest::new("sweep", input, resolved, outputs))?;
    Ok(rows
        .iter()
        .map(|r| format!("{:>9} cycles={} speedup={:.3}", r.point.label, r.stats.cycles, r.speedup))
        .collect::<Vec<_>>()
        .join("\n"))
}
