use super::{check_contiguous, AccumulatorError, CombineOp, Payload, TaggedValue, INVALID_TAG};
use crate::graph::VertexId;

/// A combining node: lane `right` absorbs the running value of lane `left`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Node {
    pub left: usize,
    pub right: usize,
}

/// Minimum-depth Ladner-Fischer prefix network (the divide-and-conquer
/// construction with `log2 N` levels and `(N/2) log2 N` nodes).
///
/// At level `l` every lane whose bit `l` is set absorbs the last lane of the
/// lower half of its `2^(l+1)` block. In segmented mode a node only combines
/// when both inputs carry the same destination tag; otherwise the right lane
/// is a breakpoint and keeps its own value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScanNetwork {
    width: usize,
    levels: Vec<Vec<Node>>,
}

impl ScanNetwork {
    pub fn new(width: usize) -> Result<Self, AccumulatorError> {
        if width == 0 || !width.is_power_of_two() {
            return Err(AccumulatorError::BadWidth(width));
        }
        let depth = width.trailing_zeros() as usize;
        let levels = (0..depth)
            .map(|l| {
                let half = 1usize << l;
                (0..width)
                    .filter(|lane| lane & half != 0)
                    .map(|lane| Node { left: (lane & !(2 * half - 1)) + half - 1, right: lane })
                    .collect()
            })
            .collect();
        Ok(Self { width, levels })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[Vec<Node>] {
        &self.levels
    }

    pub fn node_count(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    /// Largest number of nodes on any input-to-output path.
    pub fn critical_path(&self) -> usize {
        let mut path = vec![0usize; self.width];
        for level in &self.levels {
            let snapshot = path.clone();
            for n in level {
                path[n.right] = snapshot[n.left].max(snapshot[n.right]) + 1;
            }
        }
        path.into_iter().max().unwrap_or(0)
    }

    /// Largest number of nodes reading any single lane within one level.
    pub fn max_fanout(&self) -> usize {
        self.levels
            .iter()
            .map(|level| {
                let mut count = vec![0usize; self.width];
                for n in level {
                    count[n.left] += 1;
                }
                count.into_iter().max().unwrap_or(0)
            })
            .max()
            .unwrap_or(0)
    }

    /// Plain inclusive prefix scan (a single segment).
    pub fn prefix_scan<T: Payload>(&self, values: &[T], op: CombineOp) -> Result<Vec<T>, AccumulatorError> {
        if values.len() != self.width {
            return Err(AccumulatorError::WidthMismatch { got: values.len(), width: self.width });
        }
        let mut vals = values.to_vec();
        for level in &self.levels {
            for n in level {
                vals[n.right] = op.apply(vals[n.left], vals[n.right]);
            }
        }
        Ok(vals)
    }

    /// Segmented scan comparing full destination tags.
    pub fn scan<T: Payload>(&self, batch: &[TaggedValue<T>], op: CombineOp) -> Result<Vec<T>, AccumulatorError> {
        self.check(batch)?;
        Ok(self.evaluate(batch, op, |t| t))
    }

    /// Segmented scan comparing only the low `tag_bits` bits of each tag, as
    /// the hardware does. Only sound when no two distinct tags in the batch
    /// share those bits; that condition is checked and reported.
    pub fn scan_compressed<T: Payload>(
        &self,
        batch: &[TaggedValue<T>],
        op: CombineOp,
        tag_bits: u32,
    ) -> Result<Vec<T>, AccumulatorError> {
        self.check(batch)?;
        let mask = if tag_bits >= 32 { VertexId::MAX } else { (1 << tag_bits) - 1 };
        let mut owners: Vec<(VertexId, VertexId)> = Vec::new();
        for tv in batch.iter().filter(|tv| tv.valid) {
            let low = tv.tag & mask;
            match owners.iter().find(|(l, _)| *l == low) {
                Some(&(_, owner)) if owner != tv.tag => {
                    return Err(AccumulatorError::TagAliasing { a: owner, b: tv.tag, bits: tag_bits })
                }
                Some(_) => {}
                None => owners.push((low, tv.tag)),
            }
        }
        Ok(self.evaluate(batch, op, |t| t & mask))
    }

    fn check<T>(&self, batch: &[TaggedValue<T>]) -> Result<(), AccumulatorError> {
        if batch.len() != self.width {
            return Err(AccumulatorError::WidthMismatch { got: batch.len(), width: self.width });
        }
        if cfg!(debug_assertions) {
            check_contiguous(batch)?;
        }
        Ok(())
    }

    fn evaluate<T: Payload>(
        &self,
        batch: &[TaggedValue<T>],
        op: CombineOp,
        key: impl Fn(VertexId) -> VertexId,
    ) -> Vec<T> {
        let mut vals: Vec<T> = Vec::with_capacity(self.width);
        let mut tags: Vec<VertexId> = Vec::with_capacity(self.width);
        for tv in batch {
            if tv.valid {
                vals.push(tv.value);
                tags.push(key(tv.tag));
            } else {
                vals.push(op.identity());
                tags.push(INVALID_TAG);
            }
        }
        // Within a level no node's left input is another node's output, so
        // the update can be done in place.
        for level in &self.levels {
            for n in level {
                if tags[n.left] == tags[n.right] {
                    vals[n.right] = op.apply(vals[n.left], vals[n.right]);
                }
            }
        }
        vals
    }
}
