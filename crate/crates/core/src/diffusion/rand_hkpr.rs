//! Monte Carlo heat-kernel PageRank: Poisson-length random walks from the seed.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{DiffusionParams, DiffusionResult};
use crate::error::Result;
use crate::frontier::Execution;
use crate::graph::{Graph, VertexId};
use crate::primitives::{filter, integer_sort_by_key};
use crate::sparse::{AtomicTable, SparseVec};

/// Walk-length distribution: Poisson(t) for `k < K`, remaining tail mass on `K`.
pub fn walk_length_pmf(t: f64, max_len: u32) -> Vec<f64> {
    let k_max = max_len as usize;
    let mut pmf = Vec::with_capacity(k_max + 1);
    let mut term = (-t).exp();
    let mut head = 0.0;
    for k in 0..k_max {
        pmf.push(term);
        head += term;
        term *= t / (k + 1) as f64;
    }
    pmf.push((1.0 - head).max(0.0));
    pmf
}

/// Precomputed inverse-CDF sampler for walk lengths.
struct LengthSampler {
    cdf: Vec<f64>,
}

impl LengthSampler {
    fn new(t: f64, max_len: u32) -> Self {
        let pmf = walk_length_pmf(t, max_len);
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = pmf[..pmf.len() - 1]
            .iter()
            .map(|x| {
                acc += x;
                acc
            })
            .collect();
        cdf.shrink_to_fit();
        LengthSampler { cdf }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> u32 {
        let u: f64 = rng.gen();
        self.cdf
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.cdf.len()) as u32
    }
}

pub fn sample_walk_length<R: Rng>(t: f64, max_len: u32, rng: &mut R) -> u32 {
    LengthSampler::new(t, max_len).sample(rng)
}

/// The generator for walk number `walk`: one ChaCha stream per walk under a shared key.
pub fn walk_rng(rng_seed: u64, walk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    rng.set_stream(walk);
    rng
}

fn walk(g: &Graph, start: VertexId, sampler: &LengthSampler, mut rng: ChaCha8Rng) -> (VertexId, u64) {
    let len = sampler.sample(&mut rng);
    let mut v = start;
    let mut steps = 0;
    for _ in 0..len {
        let nb = g.neighbors(v);
        if nb.is_empty() {
            break;
        }
        v = nb[rng.gen_range(0..nb.len())];
        steps += 1;
    }
    (v, steps)
}

fn run_walks(g: &Graph, seed: VertexId, params: &DiffusionParams, exec: Execution) -> (Vec<VertexId>, u64) {
    let sampler = LengthSampler::new(params.t, params.max_walk_len);
    let steps = AtomicU64::new(0);
    let one = |i: u64| {
        let (v, s) = walk(g, seed, &sampler, walk_rng(params.rng_seed, i));
        steps.fetch_add(s, Ordering::Relaxed);
        v
    };
    let endpoints = if exec.is_parallel() {
        (0..params.num_walks).into_par_iter().map(one).collect()
    } else {
        (0..params.num_walks).map(one).collect()
    };
    (endpoints, steps.into_inner())
}

/// Final vertex of every walk, indexed by walk number. Identical in both modes.
pub fn sample_endpoints(g: &Graph, params: &DiffusionParams, exec: Execution) -> Result<Vec<VertexId>> {
    let seed = params.validate(g)?;
    Ok(run_walks(g, seed, params, exec).0)
}

/// Counts occurrences of each vertex: dense relabelling, integer sort, then
/// run boundaries found by filter. Output is sorted by vertex.
pub fn tally_endpoints(endpoints: &[VertexId], exec: Execution) -> Vec<(VertexId, u64)> {
    if endpoints.is_empty() {
        return Vec::new();
    }
    let table = AtomicTable::with_capacity(endpoints.len().min(1 << 16));
    let next = AtomicU64::new(0);
    let label = |&v: &VertexId| table.dense_id(v as u64, &next) as usize;
    let ids: Vec<usize> = if exec.is_parallel() {
        endpoints.par_iter().map(label).collect()
    } else {
        endpoints.iter().map(label).collect()
    };
    let distinct = next.into_inner() as usize;
    let mut vertex_of = vec![0 as VertexId; distinct];
    for (key, payload) in table.entries() {
        vertex_of[(payload - 1) as usize] = key as VertexId;
    }

    let sorted = integer_sort_by_key(&ids, distinct - 1, exec, |&i| i);
    let positions: Vec<usize> = (0..sorted.len()).collect();
    let starts = filter(&positions, exec, |&i| i == 0 || sorted[i] != sorted[i - 1]);

    let mut counts: Vec<(VertexId, u64)> = starts
        .iter()
        .enumerate()
        .map(|(k, &s)| {
            let end = starts.get(k + 1).copied().unwrap_or(sorted.len());
            (vertex_of[sorted[s]], (end - s) as u64)
        })
        .collect();
    counts.sort_unstable_by_key(|c| c.0);
    counts
}

/// `p[v]` = fraction of walks ending at `v`.
///
/// Counters: `push_count` is the number of walks, `edges_touched` the total
/// steps taken, `iterations` is 1 (a single round of independent walks).
pub fn rand_hkpr(g: &Graph, params: &DiffusionParams, exec: Execution) -> Result<DiffusionResult> {
    let seed = params.validate(g)?;
    let (endpoints, steps) = run_walks(g, seed, params, exec);
    let counts = tally_endpoints(&endpoints, exec);
    let walks = params.num_walks as f64;

    let mut out = DiffusionResult::new(params, exec);
    out.p = SparseVec::with_capacity(counts.len());
    for &(v, c) in &counts {
        out.p.accumulate(v, c as f64 / walks);
    }
    out.iterations = 1;
    out.push_count = params.num_walks;
    out.edges_touched = steps;
    out.entries_created = counts.len() as u64;
    Ok(out)
}
