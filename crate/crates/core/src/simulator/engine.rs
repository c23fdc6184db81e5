use std::collections::VecDeque;
use std::ops::Range;

use super::{PipelineConfig, SimError, SimStats, Stalls};
use crate::accumulator::{
    select_results, AccumulatedResult, CombineOp, DestAccumulatorArray, ScanNetwork, TaggedValue, WriteBack,
};
use crate::algorithms::{Frontier, VertexProgram};
use crate::graph::{Graph, VertexId};
use crate::memory::{BankedMemory, DramChannel, ReadBatch, ReadResponse, ReorderBuffer, SourceReadUnit};
use crate::scheduler::{work_items, ScheduleStep, VertexScheduler};

/// Counters accumulated over every pass of a run.
#[derive(Clone, Debug, Default)]
pub(super) struct Counters {
    stalls: Stalls,
    productive: u64,
    drain: u64,
    update_stage: u64,
    memory_busy: u64,
    memory_ideal: u64,
    lanes: u64,
    slices: u64,
    lines: u64,
    write_backs: u64,
    write_port_conflicts: u64,
    crossbar_collisions: u64,
    scheduler_extra: u64,
}

impl Counters {
    pub(super) fn fill(&self, s: &mut SimStats) {
        s.stalls.atomic += self.stalls.atomic;
        s.stalls.bank_conflict += self.stalls.bank_conflict;
        s.stalls.reorder += self.stalls.reorder;
        s.stalls.scheduler += self.stalls.scheduler;
        s.stalls.crossbar += self.stalls.crossbar;
        s.stalls.dram += self.stalls.dram;
        s.productive_cycles = self.productive;
        s.drain_cycles = self.drain;
        s.update_stage_cycles = self.update_stage;
        s.memory_busy_cycles = self.memory_busy;
        s.memory_ideal_cycles = self.memory_ideal;
        s.lanes_consumed = self.lanes;
        s.slices = self.slices;
        s.lines = self.lines;
        s.write_backs = self.write_backs;
        s.write_port_conflicts = self.write_port_conflicts;
        s.crossbar_collisions = self.crossbar_collisions;
        s.scheduler_extra_cycles = self.scheduler_extra;
    }
}

/// Edges of one cacheline handled by the vertex units in one cycle.
struct Slice {
    line: u64,
    edges: Range<u64>,
    /// First lane of the slice within its cacheline.
    lane_offset: usize,
    first_of_line: bool,
    vertices: Vec<VertexId>,
    tags: Vec<VertexId>,
    ends: Vec<(VertexId, usize)>,
    max_run: u64,
}

impl Slice {
    fn new(step: ScheduleStep, lanes: u64) -> Self {
        Self {
            line: step.address / lanes,
            lane_offset: (step.edges.start - step.address) as usize,
            first_of_line: step.first_of_line,
            vertices: step.vertices.iter().map(|v| v.vertex).collect(),
            tags: step.lane_tags(),
            ends: step.last_lanes(),
            max_run: step.vertices.iter().map(|v| v.lanes()).max().unwrap_or(0),
            edges: step.edges,
        }
    }

    fn len(&self) -> usize {
        self.tags.len()
    }
}

/// Why the front end issued nothing this cycle.
enum Blocked {
    Dram,
    Atomic,
    Reorder,
    Banks,
}

type Source<T> = (T, bool);

pub(super) struct Engine<'p, P: VertexProgram> {
    program: &'p P,
    op: CombineOp,
    cfg: PipelineConfig,
    units: usize,
    lanes: usize,
    network: ScanNetwork,
    replicas: usize,
    /// Iteration-start states with their frontier flags.
    cur: BankedMemory<Source<P::Value>>,
    next: BankedMemory<P::Value>,
    rb: ReorderBuffer<Source<P::Value>>,
    reader: SourceReadUnit,
    /// Uncommitted write-backs per vertex (atomic protection).
    in_flight: Vec<u32>,
    pub(super) counters: Counters,
}

impl<'p, P: VertexProgram> Engine<'p, P> {
    pub(super) fn new(program: &'p P, cfg: &PipelineConfig, initial: &[P::Value]) -> Result<Self, SimError> {
        let lanes = cfg.edge_lanes;
        let units = cfg.effective_pipelines();
        let seed: Vec<Source<P::Value>> = initial.iter().map(|&x| (x, false)).collect();
        Ok(Self {
            program,
            op: program.op(),
            cfg: cfg.clone(),
            units,
            lanes,
            network: ScanNetwork::new(lanes)?,
            replicas: units.next_power_of_two(),
            cur: BankedMemory::new(cfg.banks, cfg.bank_queue_depth, &seed)?,
            next: BankedMemory::new(cfg.banks, 1, initial)?,
            rb: ReorderBuffer::new(cfg.reorder_capacity, lanes)?,
            reader: SourceReadUnit::new(cfg.mode.memory_mode()),
            in_flight: vec![0; initial.len()],
            counters: Counters::default(),
        })
    }

    /// Loads the iteration-start snapshot and resets the next-state buffer.
    pub(super) fn begin_iteration(&mut self, cur: &[P::Value], frontier: &Frontier) {
        let all = self.program.all_active();
        let seeded: Vec<Source<P::Value>> =
            cur.iter().zip(frontier.current()).map(|(&x, &a)| (x, all || a)).collect();
        self.cur.load(&seeded);
        let next: Vec<P::Value> = cur.iter().map(|&x| self.program.reset(x)).collect();
        self.next.load(&next);
    }

    pub(super) fn next_states(&self) -> Vec<P::Value> {
        self.next.snapshot()
    }

    /// Streams every edge of `sub` once. Returns the cycles taken.
    pub(super) fn run_pass(&mut self, sub: &Graph, range: Range<VertexId>) -> u64 {
        let edges = sub.neighbor_array();
        let total = edges.len() as u64;
        if total == 0 {
            return 0;
        }
        let w = self.lanes as u64;
        let lines = total.div_ceil(w);
        let protection = self.cfg.mode.atomic_protection();
        let serialize = self.cfg.mode.serialized_updates();
        let wb_delay = 1 + self.program.extra_pipeline_stages();
        let banks = self.cfg.banks as u64;

        let mut sched = VertexScheduler::new(work_items(sub, range), self.units, self.lanes);
        let mut dram = DramChannel::new(self.cfg.dram_latency, self.lanes);
        let mut dest = self
            .cfg
            .mode
            .dest_accumulator()
            .then(|| DestAccumulatorArray::new(self.replicas, self.op).expect("power-of-two replicas"));
        let mut arrivals: VecDeque<u64> = VecDeque::new();
        let mut fetched = 0u64;
        let mut cur_line = 0u64;
        let mut pending: Option<Slice> = None;
        let mut in_memory: VecDeque<Slice> = VecDeque::new();
        let mut p4: Option<(u64, Vec<AccumulatedResult<P::Value>>)> = None;
        let mut xbar: Vec<VecDeque<AccumulatedResult<P::Value>>> = vec![VecDeque::new(); self.replicas];
        let mut wb: VecDeque<(u64, WriteBack<P::Value>)> = VecDeque::new();
        let mut responses: Vec<ReadResponse<Source<P::Value>>> = Vec::new();
        let mut sink = Vec::new();
        let mut flushed = false;
        let mut t = 0u64;

        loop {
            // P6: commit write-backs, one per bank write port.
            let mut i = 0;
            while i < wb.len() {
                let (ready, w) = wb[i];
                if ready > t {
                    break;
                }
                if self.next.write_port_free(w.vertex) {
                    let merged = self.op.apply(self.next.peek(w.vertex), w.value);
                    self.next.write(w.vertex, merged).expect("port checked free");
                    if protection {
                        self.in_flight[w.vertex as usize] -= 1;
                    }
                    self.counters.write_backs += 1;
                    wb.remove(i);
                } else {
                    self.counters.write_port_conflicts += 1;
                    i += 1;
                }
            }
            self.next.step(&mut sink);

            // P5: every replica takes one result.
            for q in xbar.iter_mut() {
                if let Some(res) = q.pop_front() {
                    let out = match dest.as_mut() {
                        Some(d) => d.accept(res),
                        None => Some(WriteBack { vertex: res.tag, value: res.value }),
                    };
                    if let Some(out) = out {
                        wb.push_back((t + wb_delay, out));
                    }
                }
            }

            // P4 -> P5.
            let mut xbar_blocked = false;
            if let Some((remaining, results)) = p4.as_mut() {
                if *remaining > 1 {
                    *remaining -= 1;
                } else {
                    let mask = self.replicas - 1;
                    let mut need = vec![0usize; self.replicas];
                    for r in results.iter() {
                        need[r.tag as usize & mask] += 1;
                    }
                    let depth = self.cfg.crossbar_fifo_depth;
                    if need.iter().zip(&xbar).all(|(&k, q)| q.len() + k <= depth.max(k)) {
                        self.counters.crossbar_collisions +=
                            need.iter().map(|k| k.saturating_sub(1) as u64).sum::<u64>();
                        for r in results.drain(..) {
                            xbar[r.tag as usize & mask].push_back(r);
                        }
                        p4 = None;
                    } else {
                        xbar_blocked = true;
                    }
                }
            }
            let p4_serializing = p4.as_ref().is_some_and(|(r, _)| *r > 1);

            // P4 intake: accumulate the oldest completed batch.
            if p4.is_none() {
                if let Some(batch) = self.rb.release() {
                    let slice = in_memory.pop_front().expect("released batch without a slice");
                    let results = self.accumulate(&slice, &batch.lanes, edges);
                    let cost = if serialize { slice.max_run } else { 1 };
                    self.counters.update_stage += cost;
                    p4 = Some((cost, results));
                }
            }

            // P3: shuffle source reads into the banks and serve them.
            self.reader.pump(&mut self.cur);
            if self.cur.queued() > 0 {
                self.counters.memory_busy += 1;
            }
            responses.clear();
            self.cur.step(&mut responses);
            for r in &responses {
                self.rb.arrive(r.request.token, r.request.lane, r.value);
            }

            // Off-chip edge stream.
            while fetched < lines && fetched < cur_line + self.cfg.edge_prefetch_lines as u64 {
                arrivals.push_back(dram.issue(t));
                fetched += 1;
            }

            // P1/P2: schedule vertices against the current cacheline and
            // try to hand the slice to P3.
            let mut blocked = None;
            let mut issued = None;
            if pending.is_none() && cur_line < lines {
                if arrivals.front().is_some_and(|&a| a <= t) {
                    let step = sched.schedule(cur_line * w);
                    if step.line_done {
                        cur_line += 1;
                        arrivals.pop_front();
                    }
                    pending = Some(Slice::new(step, w));
                } else {
                    blocked = Some(Blocked::Dram);
                }
            }
            if let Some(slice) = pending.as_ref() {
                if protection && slice.vertices.iter().any(|&v| self.in_flight[v as usize] > 0) {
                    blocked = Some(Blocked::Atomic);
                } else if !self.rb.can_admit(slice.line) {
                    blocked = Some(Blocked::Reorder);
                } else if !self.reader.can_accept(&self.cur) {
                    blocked = Some(Blocked::Banks);
                } else {
                    let slice = pending.take().unwrap();
                    let lane_ids: Vec<usize> = (slice.lane_offset..slice.lane_offset + slice.len()).collect();
                    let token = self.rb.admit(slice.line, &lane_ids).expect("admission checked");
                    let requests = lane_ids
                        .iter()
                        .zip(slice.edges.clone())
                        .map(|(&lane, e)| (lane, edges[e as usize]))
                        .collect();
                    self.reader.accept(ReadBatch { token, requests });
                    if protection {
                        for &v in &slice.vertices {
                            self.in_flight[v as usize] += 1;
                        }
                    }
                    self.counters.lanes += slice.len() as u64;
                    self.counters.slices += 1;
                    self.counters.memory_ideal += (slice.len() as u64).div_ceil(banks);
                    if slice.first_of_line {
                        self.counters.lines += 1;
                    }
                    issued = Some(slice.first_of_line);
                    in_memory.push_back(slice);
                }
            }

            let s = &mut self.counters.stalls;
            match (issued, blocked) {
                (Some(true), _) => self.counters.productive += 1,
                (Some(false), _) => s.scheduler += 1,
                (None, Some(Blocked::Dram)) => s.dram += 1,
                (None, Some(Blocked::Atomic)) => s.atomic += 1,
                (None, Some(Blocked::Banks)) => s.bank_conflict += 1,
                (None, Some(Blocked::Reorder)) if p4_serializing => s.atomic += 1,
                (None, Some(Blocked::Reorder)) if xbar_blocked => s.crossbar += 1,
                (None, Some(Blocked::Reorder)) => s.reorder += 1,
                (None, None) => self.counters.drain += 1,
            }
            t += 1;

            let front_done = cur_line == lines && pending.is_none();
            let pipeline_empty = front_done
                && self.reader.is_idle()
                && self.cur.queued() == 0
                && self.rb.is_empty()
                && p4.is_none()
                && xbar.iter().all(VecDeque::is_empty);
            if pipeline_empty {
                if !flushed {
                    flushed = true;
                    if let Some(d) = dest.as_mut() {
                        wb.extend(d.flush_all().into_iter().map(|out| (t + wb_delay, out)));
                    }
                }
                if wb.is_empty() {
                    break;
                }
            }
        }
        self.counters.scheduler_extra += sched.extra_cycles();
        t
    }

    /// P4 for one slice: scatter, segmented scan, multiplexer.
    fn accumulate(
        &self,
        slice: &Slice,
        lanes: &[(usize, Source<P::Value>)],
        edges: &[VertexId],
    ) -> Vec<AccumulatedResult<P::Value>> {
        debug_assert_eq!(lanes.len(), slice.len());
        let mut batch = Vec::with_capacity(self.lanes);
        for (j, &(lane, (state, active))) in lanes.iter().enumerate() {
            debug_assert_eq!(lane, slice.lane_offset + j);
            let u = edges[slice.edges.start as usize + j];
            let value = if active { self.program.scatter(u, state) } else { self.op.identity() };
            batch.push(TaggedValue::new(value, slice.tags[j]));
        }
        batch.resize(self.lanes, TaggedValue::empty(self.op));
        let scanned = self.network.scan(&batch, self.op).expect("scheduler emits contiguous runs");
        select_results(&scanned, &slice.ends)
    }
}
