//! Approximate personalized PageRank by residual pushes.

use std::collections::VecDeque;

use rayon::prelude::*;

use super::{Algorithm, DiffusionParams, DiffusionResult, IterationView, Observer};
use crate::error::{Error, Result};
use crate::frontier::{edge_map_indexed, frontier_filter, vertex_map_indexed, Execution, Frontier};
use crate::graph::{Graph, VertexId};
use crate::sparse::SparseVec;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PushRule {
    /// Keep `alpha * r`, leave half of the rest on `v`, spread the other half.
    Original,
    /// Keep `2 alpha / (1 + alpha) * r`, spread everything else, zero `r[v]`.
    Optimized,
}

/// How a push of residual `rv` at a vertex of degree `d` splits the mass.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Split {
    pub to_p: f64,
    pub stays: f64,
    pub per_neighbor: f64,
}

impl PushRule {
    pub fn for_algorithm(a: Algorithm) -> Option<PushRule> {
        match a {
            Algorithm::PrNibbleOriginal => Some(PushRule::Original),
            Algorithm::PrNibbleOptimized => Some(PushRule::Optimized),
            _ => None,
        }
    }

    #[inline]
    pub(crate) fn split(self, alpha: f64, rv: f64, d: usize) -> Split {
        let d = d as f64;
        match self {
            PushRule::Original => Split {
                to_p: alpha * rv,
                stays: (1.0 - alpha) * rv / 2.0,
                per_neighbor: (1.0 - alpha) * rv / (2.0 * d),
            },
            PushRule::Optimized => Split {
                to_p: 2.0 * alpha / (1.0 + alpha) * rv,
                stays: 0.0,
                per_neighbor: (1.0 - alpha) / (1.0 + alpha) * rv / d,
            },
        }
    }
}

fn check_work(pushed_volume: u64, bound: f64) -> Result<()> {
    if pushed_volume as f64 > bound {
        return Err(Error::WorkBoundExceeded {
            pushed_volume,
            bound,
        });
    }
    Ok(())
}

pub fn pr_nibble(g: &Graph, params: &DiffusionParams, exec: Execution) -> Result<DiffusionResult> {
    pr_nibble_with(g, params, exec, &mut |_| {})
}

/// Pushes until every vertex has `r[v] < d(v) * epsilon`.
///
/// Parallel mode pushes the whole above-threshold set each round from a
/// snapshot of its residuals; the residual vector is updated in place by
/// deltas, so untouched entries carry over between rounds. Sequential mode
/// drains a FIFO queue, pushing the front vertex until it falls below threshold.
pub fn pr_nibble_with(
    g: &Graph,
    params: &DiffusionParams,
    exec: Execution,
    observer: Observer<'_>,
) -> Result<DiffusionResult> {
    let seed = params.validate(g)?;
    let rule = PushRule::for_algorithm(params.algorithm)
        .ok_or_else(|| Error::param("algorithm", "not a PR-Nibble variant"))?;
    if g.degree(seed) == 0 {
        return Ok(DiffusionResult::isolated_seed(seed, params, exec));
    }
    match exec {
        Execution::Parallel => parallel(g, seed, rule, params, observer),
        Execution::Sequential => sequential(g, seed, rule, params, observer),
    }
}

fn threshold(g: &Graph, v: VertexId, eps: f64) -> f64 {
    g.degree(v) as f64 * eps
}

fn parallel(
    g: &Graph,
    seed: VertexId,
    rule: PushRule,
    params: &DiffusionParams,
    observer: Observer<'_>,
) -> Result<DiffusionResult> {
    let exec = Execution::Parallel;
    let (alpha, eps, bound) = (params.alpha, params.epsilon, params.work_bound());
    let mut out = DiffusionResult::new(params, exec);
    let p = SparseVec::new();
    let r = SparseVec::from_entries([(seed, 1.0)]);

    let mut frontier = if 1.0 >= threshold(g, seed, eps) {
        Frontier::single(seed)
    } else {
        Frontier::empty()
    };

    while !frontier.is_empty() {
        out.pushed_volume += frontier.volume(g);
        check_work(out.pushed_volume, bound)?;
        out.push_count += frontier.len() as u64;
        out.iterations += 1;

        // Residuals as of the start of the round; neighbour pushes below must not see each other.
        let snap: Vec<f64> = frontier.as_slice().par_iter().map(|&v| r.get(v)).collect();
        vertex_map_indexed(&frontier, exec, |i, v| {
            let s = rule.split(alpha, snap[i], g.degree(v));
            p.accumulate(v, s.to_p);
            r.accumulate(v, s.stays - snap[i]);
        });
        let touched = edge_map_indexed(g, &frontier, exec, |i, src, dst| {
            r.accumulate(dst, rule.split(alpha, snap[i], g.degree(src)).per_neighbor)
        });
        out.edges_touched += touched.edges_visited;

        let mut candidates = frontier.as_slice().to_vec();
        candidates.extend_from_slice(&touched.touched);
        frontier = frontier_filter(&candidates, exec, |v| r.get(v) >= threshold(g, v, eps));

        observer(&IterationView {
            iteration: out.iterations,
            p: &p,
            residual: Some(&r),
            frontier: frontier.as_slice(),
        });
    }
    out.entries_created = (p.len() + r.len()) as u64;
    out.p = p;
    out.residual = Some(r);
    Ok(out)
}

fn sequential(
    g: &Graph,
    seed: VertexId,
    rule: PushRule,
    params: &DiffusionParams,
    observer: Observer<'_>,
) -> Result<DiffusionResult> {
    let (alpha, eps, bound) = (params.alpha, params.epsilon, params.work_bound());
    let mut out = DiffusionResult::new(params, Execution::Sequential);
    let p = SparseVec::new();
    let r = SparseVec::from_entries([(seed, 1.0)]);

    let mut queue = VecDeque::new();
    if 1.0 >= threshold(g, seed, eps) {
        queue.push_back(seed);
    }

    while let Some(v) = queue.pop_front() {
        let d = g.degree(v);
        let thr_v = threshold(g, v, eps);
        loop {
            let rv = r.get(v);
            if rv < thr_v {
                break;
            }
            out.pushed_volume += d as u64;
            check_work(out.pushed_volume, bound)?;
            out.push_count += 1;

            let s = rule.split(alpha, rv, d);
            p.accumulate(v, s.to_p);
            r.accumulate(v, s.stays - rv);
            for &w in g.neighbors(v) {
                let old = r.fetch_add(w, s.per_neighbor);
                let thr_w = threshold(g, w, eps);
                if old < thr_w && old + s.per_neighbor >= thr_w {
                    queue.push_back(w);
                }
            }
            out.edges_touched += d as u64;
        }
        out.iterations += 1;
        observer(&IterationView {
            iteration: out.iterations,
            p: &p,
            residual: Some(&r),
            frontier: &[v],
        });
    }
    out.entries_created = (p.len() + r.len()) as u64;
    out.p = p;
    out.residual = Some(r);
    Ok(out)
}
