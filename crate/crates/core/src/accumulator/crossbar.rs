use super::{AccumulatedResult, AccumulatorError, CombineOp, Payload};
use crate::graph::VertexId;

/// A final per-vertex value leaving the accumulator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WriteBack<T> {
    pub vertex: VertexId,
    pub value: T,
}

/// Results grouped by replica (`tag mod m`), in arrival order.
#[derive(Clone, Debug, PartialEq)]
pub struct CrossbarRouting<T> {
    pub per_replica: Vec<Vec<AccumulatedResult<T>>>,
    /// Results that had to wait behind another one for the same replica.
    pub collisions: usize,
    /// Cycles to drain the batch through the switch (one result per replica
    /// per cycle).
    pub cycles: usize,
}

pub fn route_crossbar<T: Payload>(
    results: &[AccumulatedResult<T>],
    replicas: usize,
) -> Result<CrossbarRouting<T>, AccumulatorError> {
    if replicas == 0 || !replicas.is_power_of_two() {
        return Err(AccumulatorError::BadReplicaCount(replicas));
    }
    let mask = (replicas - 1) as VertexId;
    let mut per_replica = vec![Vec::new(); replicas];
    for r in results {
        per_replica[(r.tag & mask) as usize].push(*r);
    }
    let cycles = per_replica.iter().map(Vec::len).max().unwrap_or(0);
    let collisions = per_replica.iter().map(|q| q.len().saturating_sub(1)).sum();
    Ok(CrossbarRouting { per_replica, collisions, cycles })
}

/// Holds one vertex's running value in a register and writes it back only
/// when a different vertex arrives.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DestAccumulator<T> {
    held: Option<(VertexId, T)>,
}

impl<T: Payload> DestAccumulator<T> {
    pub fn new() -> Self {
        Self { held: None }
    }

    pub fn held(&self) -> Option<(VertexId, T)> {
        self.held
    }

    pub fn accept(&mut self, incoming: AccumulatedResult<T>, op: CombineOp) -> Option<WriteBack<T>> {
        match &mut self.held {
            Some((tag, value)) if *tag == incoming.tag => {
                *value = op.apply(*value, incoming.value);
                None
            }
            slot => slot
                .replace((incoming.tag, incoming.value))
                .map(|(vertex, value)| WriteBack { vertex, value }),
        }
    }

    pub fn flush(&mut self) -> Option<WriteBack<T>> {
        self.held.take().map(|(vertex, value)| WriteBack { vertex, value })
    }
}

/// Replicated destination accumulators behind the crossbar.
#[derive(Clone, Debug)]
pub struct DestAccumulatorArray<T> {
    replicas: Vec<DestAccumulator<T>>,
    op: CombineOp,
}

impl<T: Payload> DestAccumulatorArray<T> {
    pub fn new(replicas: usize, op: CombineOp) -> Result<Self, AccumulatorError> {
        if replicas == 0 || !replicas.is_power_of_two() {
            return Err(AccumulatorError::BadReplicaCount(replicas));
        }
        Ok(Self { replicas: vec![DestAccumulator::new(); replicas], op })
    }

    pub fn replica_count(&self) -> usize {
        self.replicas.len()
    }

    pub fn replica_of(&self, tag: VertexId) -> usize {
        (tag as usize) & (self.replicas.len() - 1)
    }

    pub fn accept(&mut self, incoming: AccumulatedResult<T>) -> Option<WriteBack<T>> {
        let r = self.replica_of(incoming.tag);
        self.replicas[r].accept(incoming, self.op)
    }

    /// Empties every register, in replica order.
    pub fn flush_all(&mut self) -> Vec<WriteBack<T>> {
        self.replicas.iter_mut().filter_map(DestAccumulator::flush).collect()
    }
}
