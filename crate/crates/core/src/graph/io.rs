use std::collections::HashMap;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use super::{Direction, Graph, GraphError, VertexId};

pub const BINARY_MAGIC: &[u8; 4] = b"AGRF";
pub const BINARY_VERSION: u32 = 1;

/// Loads a SNAP-style edge list into a destination-major graph.
///
/// Vertex IDs are compacted to `0..n` in order of first appearance. With
/// `directed == false` every line contributes both directions.
pub fn load_edge_list(path: impl AsRef<Path>, directed: bool) -> Result<Graph, GraphError> {
    let text = fs::read_to_string(path)?;
    parse_edge_list(&text, directed)
}

pub fn parse_edge_list(text: &str, directed: bool) -> Result<Graph, GraphError> {
    let mut ids: HashMap<u64, VertexId> = HashMap::new();
    let mut edges = Vec::new();
    let compact = |raw: u64, ids: &mut HashMap<u64, VertexId>| -> VertexId {
        let next = ids.len() as VertexId;
        *ids.entry(raw).or_insert(next)
    };

    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let mut field = |what: &str| -> Result<u64, GraphError> {
            let tok = fields.next().ok_or_else(|| GraphError::Parse {
                line: line_no,
                message: format!("missing {what} vertex"),
            })?;
            tok.parse::<u64>().map_err(|e| GraphError::Parse {
                line: line_no,
                message: format!("bad {what} vertex {tok:?}: {e}"),
            })
        };
        let src = field("source")?;
        let dst = field("destination")?;
        if let Some(extra) = fields.next() {
            return Err(GraphError::Parse {
                line: line_no,
                message: format!("unexpected trailing field {extra:?}"),
            });
        }
        let s = compact(src, &mut ids);
        let d = compact(dst, &mut ids);
        edges.push((s, d));
        if !directed {
            edges.push((d, s));
        }
    }

    if edges.is_empty() {
        return Err(GraphError::Empty);
    }
    Graph::from_edges(ids.len(), &edges, Direction::InEdges)
}

/// Little-endian: magic, u32 version, u64 vertices, u64 edges, u8 direction,
/// u64 offsets[vertices + 1], u32 neighbors[edges].
pub fn write_binary(g: &Graph, mut out: impl Write) -> Result<(), GraphError> {
    let mut buf = Vec::with_capacity(25 + g.offsets().len() * 8 + g.num_edges() * 4);
    buf.extend_from_slice(BINARY_MAGIC);
    buf.extend_from_slice(&BINARY_VERSION.to_le_bytes());
    buf.extend_from_slice(&(g.num_vertices() as u64).to_le_bytes());
    buf.extend_from_slice(&(g.num_edges() as u64).to_le_bytes());
    buf.push(g.direction().to_byte());
    for &o in g.offsets() {
        buf.extend_from_slice(&o.to_le_bytes());
    }
    for &u in g.neighbor_array() {
        buf.extend_from_slice(&u.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn read_binary(mut input: impl Read) -> Result<Graph, GraphError> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    let mut cur = Cursor { bytes: &bytes, pos: 0 };

    if cur.take(4)? != BINARY_MAGIC {
        return Err(GraphError::Format("bad magic".into()));
    }
    let version = u32::from_le_bytes(cur.take(4)?.try_into().unwrap());
    if version != BINARY_VERSION {
        return Err(GraphError::Format(format!("unsupported version {version}")));
    }
    let n = cur.u64()?;
    let m = cur.u64()?;
    let direction = Direction::from_byte(cur.take(1)?[0])
        .ok_or_else(|| GraphError::Format("bad direction byte".into()))?;

    let expected = n
        .checked_add(1)
        .and_then(|k| k.checked_mul(8))
        .and_then(|k| k.checked_add(m.checked_mul(4)?))
        .ok_or_else(|| GraphError::Format("size overflow".into()))?;
    if (cur.remaining() as u64) != expected {
        return Err(GraphError::Format(format!(
            "payload is {} bytes, header implies {expected}",
            cur.remaining()
        )));
    }
    let offsets = (0..=n).map(|_| cur.u64()).collect::<Result<Vec<_>, _>>()?;
    let neighbors = (0..m)
        .map(|_| cur.take(4).map(|b| u32::from_le_bytes(b.try_into().unwrap())))
        .collect::<Result<Vec<_>, _>>()?;
    Graph::from_parts(offsets, neighbors, direction)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, k: usize) -> Result<&'a [u8], GraphError> {
        let end = self.pos + k;
        let s = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| GraphError::Format("truncated file".into()))?;
        self.pos = end;
        Ok(s)
    }

    fn u64(&mut self) -> Result<u64, GraphError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn directed_transcription() {
        let g = parse_edge_list("0 1\n1 2", true).unwrap();
        assert_eq!(g.num_vertices(), 3);
        assert_eq!(g.num_edges(), 2);
        assert_eq!(g.neighbors(1), &[0]);
        assert_eq!(g.neighbors(2), &[1]);
    }

    #[test]
    fn undirected_doubles() {
        let g = parse_edge_list("0 1", false).unwrap();
        assert_eq!(g.num_edges(), 2);
        assert_eq!(g.neighbors(0), &[1]);
        assert_eq!(g.neighbors(1), &[0]);
    }

    #[test]
    fn compacts_ids_by_first_appearance() {
        let g = parse_edge_list("# c\n5 7", true).unwrap();
        assert_eq!(g.num_vertices(), 2);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1)]);

        let g = parse_edge_list("9 3\n3 100\n100 9\n", true).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(2, 0), (0, 1), (1, 2)]);
    }

    #[test]
    fn neighbor_order_follows_file() {
        let g = parse_edge_list("0 9\n3 9\n1 9\n", true).unwrap();
        // 0->0, 9->1, 3->2, 1->3
        assert_eq!(g.neighbors(1), &[0, 2, 3]);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        match parse_edge_list("0 1\n# ok\n2 x\n", true) {
            Err(GraphError::Parse { line: 3, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match parse_edge_list("0 1\n4\n", true) {
            Err(GraphError::Parse { line: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match parse_edge_list("0 1 2\n", true) {
            Err(GraphError::Parse { line: 1, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_edge_list("", true), Err(GraphError::Empty)));
        assert!(matches!(parse_edge_list("# only\n\n", true), Err(GraphError::Empty)));
    }

    #[test]
    fn binary_header_layout() {
        let g = parse_edge_list("0 1\n1 2", true).unwrap();
        let mut bytes = Vec::new();
        write_binary(&g, &mut bytes).unwrap();
        assert_eq!(&bytes[..4], b"AGRF");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(u64::from_le_bytes(bytes[8..16].try_into().unwrap()), 3);
        assert_eq!(u64::from_le_bytes(bytes[16..24].try_into().unwrap()), 2);
        assert_eq!(bytes[24], 0);
        assert_eq!(bytes.len(), 25 + 4 * 8 + 2 * 4);
    }

    #[test]
    fn binary_rejects_corruption() {
        let g = parse_edge_list("0 1\n1 2", true).unwrap();
        let mut bytes = Vec::new();
        write_binary(&g, &mut bytes).unwrap();
        assert!(read_binary(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(read_binary(bad.as_slice()).is_err());
        let mut bad = bytes.clone();
        bad[24] = 7;
        assert!(read_binary(bad.as_slice()).is_err());
        let mut bad = bytes;
        let last = bad.len() - 4;
        bad[last..].copy_from_slice(&99u32.to_le_bytes());
        assert!(read_binary(bad.as_slice()).is_err());
    }

    proptest! {
        #[test]
        fn binary_round_trip(
            n in 1usize..40,
            raw in prop::collection::vec((0u32..1000, 0u32..1000), 0..200),
            out_edges in any::<bool>(),
        ) {
            let edges: Vec<_> = raw.iter().map(|&(a, b)| (a % n as u32, b % n as u32)).collect();
            let dir = if out_edges { Direction::OutEdges } else { Direction::InEdges };
            let g = Graph::from_edges(n, &edges, dir).unwrap();
            let mut bytes = Vec::new();
            write_binary(&g, &mut bytes).unwrap();
            let back = read_binary(bytes.as_slice()).unwrap();
            prop_assert_eq!(&back, &g);
            let mut again = Vec::new();
            write_binary(&back, &mut again).unwrap();
            prop_assert_eq!(bytes, again);
        }
    }
}
