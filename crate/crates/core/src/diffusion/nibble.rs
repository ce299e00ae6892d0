//! Truncated lazy random walk.

use super::{DiffusionParams, DiffusionResult, IterationView, Observer};
use crate::error::Result;
use crate::frontier::{edge_map, frontier_filter, vertex_map, Execution, Frontier};
use crate::graph::Graph;
use crate::sparse::SparseVec;

pub fn nibble(g: &Graph, params: &DiffusionParams, exec: Execution) -> Result<DiffusionResult> {
    nibble_with(g, params, exec, &mut |_| {})
}

/// Runs up to `max_iters` lazy-walk steps, keeping only vertices with
/// `p[v] >= d(v) * epsilon` active. Returns the last vector whose frontier
/// was non-empty.
pub fn nibble_with(
    g: &Graph,
    params: &DiffusionParams,
    exec: Execution,
    observer: Observer<'_>,
) -> Result<DiffusionResult> {
    let seed = params.validate(g)?;
    let eps = params.epsilon;
    let mut out = DiffusionResult::new(params, exec);

    let mut p = SparseVec::from_entries([(seed, 1.0)]);
    out.entries_created = 1;
    let mut frontier = Frontier::single(seed);

    for iter in 1..=params.max_iters as u64 {
        let vol = frontier.volume(g);
        let next = SparseVec::with_capacity(frontier.len() + vol as usize);
        vertex_map(&frontier, exec, |v| next.accumulate(v, p.get(v) / 2.0));
        let touched = edge_map(g, &frontier, exec, |s, d| {
            next.accumulate(d, p.get(s) / (2.0 * g.degree(s) as f64))
        });

        let mut candidates = frontier.as_slice().to_vec();
        candidates.extend_from_slice(&touched.touched);
        // Isolated vertices are never admitted, so mass parked on one stays put.
        let admitted = frontier_filter(&candidates, exec, |v| {
            let d = g.degree(v);
            d > 0 && next.get(v) >= d as f64 * eps
        });

        out.iterations = iter;
        out.push_count += frontier.len() as u64;
        out.pushed_volume += vol;
        out.edges_touched += touched.edges_visited;
        out.entries_created += next.len() as u64;
        observer(&IterationView {
            iteration: iter,
            p: &next,
            residual: None,
            frontier: admitted.as_slice(),
        });

        if admitted.is_empty() {
            break;
        }
        p = next;
        frontier = admitted;
    }
    out.p = p;
    Ok(out)
}
