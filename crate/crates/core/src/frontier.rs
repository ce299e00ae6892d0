//! Vertex subsets and the `vertex_map` / `edge_map` / filter primitives.
//!
//! All three do work proportional to the frontier, its incident edges, or
//! the candidate list they are given. Nothing here ever scans `0..n`.

use rayon::prelude::*;

use crate::graph::{Graph, VertexId};
use crate::sparse::AtomicTable;

pub use crate::primitives::Execution;

/// A set of distinct active vertices.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Frontier {
    vertices: Vec<VertexId>,
}

impl Frontier {
    pub fn empty() -> Self {
        Frontier::default()
    }

    pub fn single(v: VertexId) -> Self {
        Frontier { vertices: vec![v] }
    }

    /// Wraps a list the caller guarantees to be duplicate-free.
    pub fn from_distinct(vertices: Vec<VertexId>) -> Self {
        debug_assert!({
            let mut s = vertices.clone();
            s.sort_unstable();
            s.windows(2).all(|w| w[0] != w[1])
        });
        Frontier { vertices }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn as_slice(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn iter(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices.iter().copied()
    }

    /// Sum of degrees of the frontier vertices.
    pub fn volume(&self, g: &Graph) -> u64 {
        self.vertices.iter().map(|&v| g.degree(v) as u64).sum()
    }
}

/// What an `edge_map` call touched.
#[derive(Debug, Default)]
pub struct EdgeMapOutput {
    /// Destination of every edge visited, duplicates included.
    pub touched: Vec<VertexId>,
    /// Number of callback invocations, counted as they happen.
    pub edges_visited: u64,
}

/// Calls `f` once per frontier vertex.
pub fn vertex_map<F>(frontier: &Frontier, exec: Execution, f: F)
where
    F: Fn(VertexId) + Sync + Send,
{
    vertex_map_indexed(frontier, exec, |_, v| f(v))
}

/// Like [`vertex_map`], also passing the vertex's position in the frontier.
pub fn vertex_map_indexed<F>(frontier: &Frontier, exec: Execution, f: F)
where
    F: Fn(usize, VertexId) + Sync + Send,
{
    if exec.is_parallel() {
        frontier.vertices.par_iter().enumerate().for_each(|(i, &v)| f(i, v));
    } else {
        frontier.vertices.iter().enumerate().for_each(|(i, &v)| f(i, v));
    }
}

/// Calls `f(src, dst)` once for every edge leaving a frontier vertex and records
/// each `dst`. Callbacks for different sources may run concurrently and may
/// target the same destination.
pub fn edge_map<F>(g: &Graph, frontier: &Frontier, exec: Execution, f: F) -> EdgeMapOutput
where
    F: Fn(VertexId, VertexId) + Sync + Send,
{
    edge_map_indexed(g, frontier, exec, |_, s, d| f(s, d))
}

/// Like [`edge_map`], with the source's frontier position as the first argument.
/// Lets callers keep per-source state in a plain array aligned with the frontier.
pub fn edge_map_indexed<F>(g: &Graph, frontier: &Frontier, exec: Execution, f: F) -> EdgeMapOutput
where
    F: Fn(usize, VertexId, VertexId) + Sync + Send,
{
    let visit = |i: usize, v: VertexId, out: &mut Vec<VertexId>| -> u64 {
        let mut calls = 0u64;
        for &w in g.neighbors(v) {
            f(i, v, w);
            out.push(w);
            calls += 1;
        }
        calls
    };

    if exec.is_parallel() {
        let parts: Vec<(Vec<VertexId>, u64)> = frontier
            .vertices
            .par_iter()
            .enumerate()
            .fold(
                || (Vec::new(), 0u64),
                |(mut out, calls), (i, &v)| {
                    let c = visit(i, v, &mut out);
                    (out, calls + c)
                },
            )
            .collect();
        let edges_visited = parts.iter().map(|p| p.1).sum();
        let mut touched = Vec::with_capacity(parts.iter().map(|p| p.0.len()).sum());
        for (part, _) in parts {
            touched.extend(part);
        }
        EdgeMapOutput {
            touched,
            edges_visited,
        }
    } else {
        let mut touched = Vec::with_capacity(frontier.volume(g) as usize);
        let mut edges_visited = 0;
        for (i, &v) in frontier.vertices.iter().enumerate() {
            edges_visited += visit(i, v, &mut touched);
        }
        EdgeMapOutput {
            touched,
            edges_visited,
        }
    }
}

/// Distinct candidates satisfying `pred`. Sequential mode keeps first-appearance order.
pub fn frontier_filter<P>(candidates: &[VertexId], exec: Execution, pred: P) -> Frontier
where
    P: Fn(VertexId) -> bool + Sync + Send,
{
    let seen = AtomicTable::with_capacity(candidates.len());
    let first_sight = |v: &VertexId| seen.insert(*v as u64);
    let vertices: Vec<VertexId> = if exec.is_parallel() {
        candidates
            .par_iter()
            .copied()
            .filter(|v| first_sight(v))
            .filter(|&v| pred(v))
            .collect()
    } else {
        candidates
            .iter()
            .copied()
            .filter(|v| first_sight(v))
            .filter(|&v| pred(v))
            .collect()
    };
    Frontier { vertices }
}
