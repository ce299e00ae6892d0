//! Immutable CSR storage for undirected, unweighted graphs.
//!
//! Every undirected edge `{u, v}` is stored twice, once in each endpoint's
//! adjacency list. Lists are sorted ascending and free of self-loops and
//! duplicates, so `degree(v)` is exactly the number of distinct neighbors.

use std::collections::HashSet;
use std::io::{BufRead, Read, Write};

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Vertex identifier. Ids are dense in `0..n`.
pub type VertexId = u32;

const MAGIC: &[u8; 4] = b"LGC1";
const HEADER_LEN: usize = 28;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<u64>,
    neighbors: Vec<VertexId>,
}

/// Parses a SNAP-style edge list: one `u v` pair per line, `#` starts a comment line.
///
/// Self-loops and duplicates are passed through untouched; [`build_graph`]
/// removes them.
pub fn parse_edge_list<R: BufRead>(reader: R) -> Result<Vec<(u64, u64)>> {
    let mut edges = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let mut next_id = || -> Result<u64> {
            let tok = tokens.next().ok_or_else(|| Error::Parse {
                line: lineno,
                message: "expected two vertex ids".into(),
            })?;
            tok.parse::<u64>().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("`{tok}` is not a non-negative integer"),
            })
        };
        let u = next_id()?;
        let v = next_id()?;
        edges.push((u, v));
    }
    Ok(edges)
}

/// Builds a normalized graph from raw pairs.
///
/// With `symmetrize`, the reverse of every pair is added first. Without it the
/// (deduplicated, loop-free) pairs must already be symmetric. The vertex count
/// is `1 + max id`, or `n` when given, which admits trailing isolated vertices.
pub fn build_graph(pairs: &[(u64, u64)], symmetrize: bool, n: Option<usize>) -> Result<Graph> {
    let max_id = pairs.iter().map(|&(u, v)| u.max(v)).max();
    let n = match (n, max_id) {
        (Some(n), Some(max)) if (max as usize) >= n => {
            return Err(Error::Format(format!(
                "vertex id {max} does not fit in a graph with {n} vertices"
            )))
        }
        (Some(n), _) => n,
        (None, Some(max)) => max as usize + 1,
        (None, None) => 0,
    };
    if n > VertexId::MAX as usize + 1 {
        return Err(Error::Format(format!(
            "{n} vertices exceed the {}-bit vertex id width",
            VertexId::BITS
        )));
    }

    let mut directed: Vec<(VertexId, VertexId)> =
        Vec::with_capacity(pairs.len() * if symmetrize { 2 } else { 1 });
    for &(u, v) in pairs {
        if u == v {
            continue;
        }
        let (u, v) = (u as VertexId, v as VertexId);
        directed.push((u, v));
        if symmetrize {
            directed.push((v, u));
        }
    }
    directed.par_sort_unstable();
    directed.dedup();

    let mut offsets = vec![0u64; n + 1];
    for &(u, _) in &directed {
        offsets[u as usize + 1] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    let neighbors: Vec<VertexId> = directed.iter().map(|&(_, v)| v).collect();
    let graph = Graph { offsets, neighbors };

    if !symmetrize {
        if let Some((u, v)) = graph.first_asymmetric_edge() {
            return Err(Error::Format(format!(
                "edge ({u},{v}) has no reverse; pass symmetrize to add reverse edges"
            )));
        }
    }
    Ok(graph)
}

impl Graph {
    /// Convenience constructor for in-memory edge lists.
    ///
    /// # Panics
    ///
    /// Panics if `symmetrize` is false and the edges are not symmetric.
    pub fn from_edges(edges: &[(VertexId, VertexId)], symmetrize: bool) -> Self {
        let pairs: Vec<(u64, u64)> = edges.iter().map(|&(u, v)| (u as u64, v as u64)).collect();
        build_graph(&pairs, symmetrize, None).expect("invalid edge list")
    }

    /// Same as [`Graph::from_edges`] with an explicit vertex count.
    pub fn from_edges_with_n(edges: &[(VertexId, VertexId)], n: usize) -> Self {
        let pairs: Vec<(u64, u64)> = edges.iter().map(|&(u, v)| (u as u64, v as u64)).collect();
        build_graph(&pairs, true, Some(n)).expect("invalid edge list")
    }

    pub fn empty() -> Self {
        Graph {
            offsets: vec![0],
            neighbors: Vec::new(),
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of undirected edges.
    #[inline]
    pub fn m(&self) -> usize {
        self.neighbors.len() / 2
    }

    /// `2m`, the volume of the whole vertex set.
    #[inline]
    pub fn total_volume(&self) -> u64 {
        self.neighbors.len() as u64
    }

    #[inline]
    pub fn degree(&self, v: VertexId) -> usize {
        let v = v as usize;
        (self.offsets[v + 1] - self.offsets[v]) as usize
    }

    #[inline]
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        let v = v as usize;
        &self.neighbors[self.offsets[v] as usize..self.offsets[v + 1] as usize]
    }

    pub fn offsets(&self) -> &[u64] {
        &self.offsets
    }

    pub fn adjacency(&self) -> &[VertexId] {
        &self.neighbors
    }

    pub fn contains(&self, v: u64) -> bool {
        (v as usize) < self.n()
    }

    pub fn check_vertex(&self, v: u64) -> Result<VertexId> {
        if self.contains(v) {
            Ok(v as VertexId)
        } else {
            Err(Error::VertexOutOfRange {
                vertex: v,
                n: self.n() as u64,
            })
        }
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n() as VertexId)
            .map(|v| self.degree(v))
            .max()
            .unwrap_or(0)
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        (0..self.n() as VertexId).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    pub fn volume(&self, set: &VertexSet) -> u64 {
        set.iter().map(|v| self.degree(v) as u64).sum()
    }

    /// Number of edges with exactly one endpoint in `set`, by a full scan of its adjacency.
    pub fn boundary(&self, set: &VertexSet) -> u64 {
        set.iter()
            .map(|v| {
                self.neighbors(v)
                    .iter()
                    .filter(|&&w| !set.contains(w))
                    .count() as u64
            })
            .sum()
    }

    /// `|∂S| / min(vol S, 2m - vol S)`; a zero denominator yields 1.0.
    pub fn conductance(&self, set: &VertexSet) -> Result<f64> {
        if set.is_empty() {
            return Err(Error::EmptySet);
        }
        Ok(conductance_from_counts(
            self.boundary(set),
            self.volume(set),
            self.total_volume(),
        ))
    }

    fn first_asymmetric_edge(&self) -> Option<(VertexId, VertexId)> {
        (0..self.n() as VertexId).find_map(|u| {
            self.neighbors(u)
                .iter()
                .find(|&&v| self.neighbors(v).binary_search(&u).is_err())
                .map(|&v| (u, v))
        })
    }

    /// Serializes to the little-endian `LGC1` format: magic, `n`, `m`, a reserved
    /// word, then `n + 1` offsets and `2m` neighbor ids, all `u64`. The offsets
    /// array is omitted entirely for the empty graph.
    pub fn write_binary<W: Write>(&self, sink: W) -> Result<()> {
        let mut w = std::io::BufWriter::new(sink);
        w.write_all(MAGIC)?;
        w.write_all(&(self.n() as u64).to_le_bytes())?;
        w.write_all(&(self.m() as u64).to_le_bytes())?;
        w.write_all(&0u64.to_le_bytes())?;
        if self.n() > 0 {
            for &o in &self.offsets {
                w.write_all(&o.to_le_bytes())?;
            }
        }
        for &v in &self.neighbors {
            w.write_all(&(v as u64).to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_binary<R: Read>(source: R) -> Result<Graph> {
        let mut r = std::io::BufReader::new(source);
        let mut header = [0u8; HEADER_LEN];
        read_exact_or(&mut r, &mut header, "header")?;
        if &header[..4] != MAGIC {
            return Err(Error::Format("bad magic bytes, expected LGC1".into()));
        }
        let word = |i: usize| u64::from_le_bytes(header[4 + 8 * i..12 + 8 * i].try_into().unwrap());
        let (n, m) = (word(0), word(1));
        if n > VertexId::MAX as u64 + 1 {
            return Err(Error::Format(format!(
                "n = {n} exceeds the vertex id width"
            )));
        }
        let n = n as usize;

        let mut offsets = Vec::with_capacity(n + 1);
        if n == 0 {
            offsets.push(0);
        } else {
            for _ in 0..=n {
                offsets.push(read_u64(&mut r, "offsets")?);
            }
        }
        if offsets[0] != 0 {
            return Err(Error::Format("offsets[0] must be 0".into()));
        }
        if let Some(i) = offsets.windows(2).position(|w| w[0] > w[1]) {
            return Err(Error::Format(format!(
                "offsets must be non-decreasing (offsets[{}] > offsets[{}])",
                i,
                i + 1
            )));
        }
        if offsets[n] != 2 * m {
            return Err(Error::Format(format!(
                "offsets[n] = {} but 2m = {}",
                offsets[n],
                2 * m
            )));
        }

        let mut neighbors = Vec::with_capacity((2 * m) as usize);
        for _ in 0..2 * m {
            let v = read_u64(&mut r, "neighbors")?;
            if v >= n as u64 {
                return Err(Error::Format(format!(
                    "neighbor id {v} out of range for n = {n}"
                )));
            }
            neighbors.push(v as VertexId);
        }
        let graph = Graph { offsets, neighbors };
        for u in 0..n as VertexId {
            let list = graph.neighbors(u);
            if list.contains(&u) {
                return Err(Error::Format(format!("self-loop at vertex {u}")));
            }
            if list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Format(format!(
                    "adjacency of vertex {u} is not strictly ascending"
                )));
            }
        }
        if let Some((u, v)) = graph.first_asymmetric_edge() {
            return Err(Error::Format(format!("edge ({u},{v}) has no reverse")));
        }
        Ok(graph)
    }
}

fn read_exact_or<R: Read>(r: &mut R, buf: &mut [u8], what: &str) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::Format(format!("truncated file while reading {what}")),
        _ => Error::Io(e),
    })
}

fn read_u64<R: Read>(r: &mut R, what: &str) -> Result<u64> {
    let mut buf = [0u8; 8];
    read_exact_or(r, &mut buf, what)?;
    Ok(u64::from_le_bytes(buf))
}

/// Conductance from boundary size and volume; the rule shared by every caller.
#[inline]
pub fn conductance_from_counts(boundary: u64, volume: u64, total_volume: u64) -> f64 {
    let denom = volume.min(total_volume.saturating_sub(volume));
    if denom == 0 {
        1.0
    } else {
        boundary as f64 / denom as f64
    }
}

/// A set of distinct vertex ids, kept sorted.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VertexSet {
    members: Vec<VertexId>,
    lookup: HashSet<VertexId>,
}

impl VertexSet {
    /// Builds a set, dropping duplicates. Fails if any id is not a vertex of `g`.
    pub fn new(g: &Graph, ids: impl IntoIterator<Item = VertexId>) -> Result<Self> {
        let set: Self = ids.into_iter().collect();
        if let Some(&bad) = set.members.iter().find(|&&v| !g.contains(v as u64)) {
            return Err(Error::VertexOutOfRange {
                vertex: bad as u64,
                n: g.n() as u64,
            });
        }
        Ok(set)
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.lookup.contains(&v)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.members.iter().copied()
    }

    pub fn as_slice(&self) -> &[VertexId] {
        &self.members
    }

    /// `V \ self` for the given graph.
    pub fn complement(&self, g: &Graph) -> VertexSet {
        (0..g.n() as VertexId).filter(|v| !self.contains(*v)).collect()
    }
}

impl FromIterator<VertexId> for VertexSet {
    fn from_iter<I: IntoIterator<Item = VertexId>>(iter: I) -> Self {
        let mut members: Vec<VertexId> = iter.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        let lookup = members.iter().copied().collect();
        VertexSet { members, lookup }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    use crate::generators::triangle;

    #[test]
    fn parse_skips_comments() {
        let edges = parse_edge_list("# c\n0 1\n1 2\n".as_bytes()).unwrap();
        assert_eq!(edges, vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn parse_passes_self_loops_through() {
        assert_eq!(parse_edge_list("0 0\n".as_bytes()).unwrap(), vec![(0, 0)]);
    }

    #[test]
    fn parse_reports_line_number() {
        match parse_edge_list("3 x\n".as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected parse error, got {other:?}"),
        }
        match parse_edge_list("# header\n0 1\n2\n".as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn build_dedups_and_drops_loops() {
        let g = build_graph(&[(0, 1), (1, 0), (1, 1), (0, 1)], false, None).unwrap();
        assert_eq!((g.n(), g.m()), (2, 1));
        assert_eq!(g.neighbors(0), &[1]);
    }

    #[test]
    fn build_symmetrizes_triangle() {
        let g = triangle();
        assert_eq!((g.n(), g.m()), (3, 3));
        assert!((0..3).all(|v| g.degree(v) == 2));
    }

    #[test]
    fn build_rejects_asymmetric_input_without_symmetrize() {
        assert!(matches!(
            build_graph(&[(0, 1)], false, None),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn build_empty_and_trailing_isolated() {
        let g = build_graph(&[], true, None).unwrap();
        assert_eq!((g.n(), g.m()), (0, 0));
        let g = build_graph(&[(0, 1)], true, Some(5)).unwrap();
        assert_eq!(g.n(), 5);
        assert_eq!(g.degree(4), 0);
        assert!(build_graph(&[(0, 7)], true, Some(5)).is_err());
    }

    #[test]
    fn conductance_examples() {
        let g = triangle();
        let s = VertexSet::new(&g, [0]).unwrap();
        assert_eq!(g.boundary(&s), 2);
        assert_eq!(g.conductance(&s).unwrap(), 1.0);
        let all = VertexSet::new(&g, [0, 1, 2]).unwrap();
        assert_eq!(g.conductance(&all).unwrap(), 1.0);
        assert!(matches!(
            g.conductance(&VertexSet::default()),
            Err(Error::EmptySet)
        ));
    }

    #[test]
    fn binary_round_trip_and_sizes() {
        let g = triangle();
        let mut buf = Vec::new();
        g.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), HEADER_LEN + 8 * (4 + 6));
        assert_eq!(Graph::read_binary(buf.as_slice()).unwrap(), g);

        let mut buf = Vec::new();
        Graph::empty().write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 28);
        let back = Graph::read_binary(buf.as_slice()).unwrap();
        assert_eq!((back.n(), back.m()), (0, 0));
    }

    fn corrupt(mutate: impl FnOnce(&mut Vec<u8>)) -> String {
        let mut buf = Vec::new();
        triangle().write_binary(&mut buf).unwrap();
        mutate(&mut buf);
        match Graph::read_binary(buf.as_slice()) {
            Err(Error::Format(msg)) => msg,
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn binary_format_errors() {
        assert!(corrupt(|b| b[0] = b'X').contains("magic"));
        assert!(corrupt(|b| b.truncate(40)).contains("truncated"));
        // offsets[n] is the last of the four offset words.
        let last_offset = HEADER_LEN + 8 * 3;
        assert!(corrupt(|b| b[last_offset] = 3).contains("non-decreasing"));
        assert!(corrupt(|b| b[last_offset] = 4).contains("offsets[n]"));
        let first_nbr = HEADER_LEN + 8 * 4;
        assert!(corrupt(|b| b[first_nbr] = 0).contains("self-loop"));
        assert!(corrupt(|b| b[first_nbr] = 9).contains("out of range"));
    }
}
