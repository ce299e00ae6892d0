//! Network community profile: best conductance per cluster-size bucket over
//! many (seed, parameters) runs.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::diffusion::{self, Algorithm, DiffusionParams};
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};
use crate::primitives::Execution;
use crate::sweep;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NcpRecord {
    pub cluster_size: usize,
    pub conductance: f64,
    pub seed: VertexId,
    pub params: DiffusionParams,
}

impl NcpRecord {
    /// Total order used by the min fold: conductance, then size, seed and parameters.
    fn rank_cmp(&self, other: &Self) -> Ordering {
        let key = |r: &NcpRecord| {
            (
                r.params.algorithm.name(),
                r.params.alpha.to_bits(),
                r.params.epsilon.to_bits(),
                r.params.t.to_bits(),
                r.params.taylor_degree,
                r.params.max_walk_len,
                r.params.max_iters,
                r.params.num_walks,
                r.params.rng_seed,
            )
        };
        self.conductance
            .total_cmp(&other.conductance)
            .then(self.cluster_size.cmp(&other.cluster_size))
            .then(self.seed.cmp(&other.seed))
            .then_with(|| key(self).cmp(&key(other)))
    }
}

/// Size bucket: `floor(log2(size))`.
pub fn bucket_of(size: usize) -> u32 {
    assert!(size >= 1, "cluster sizes start at 1");
    usize::BITS - 1 - size.leading_zeros()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct NcpProfile {
    /// Bucket index -> best record seen.
    pub buckets: BTreeMap<u32, NcpRecord>,
    /// Runs that produced no cluster, with the reason.
    pub failures: Vec<(VertexId, String)>,
    pub runs: usize,
}

impl NcpProfile {
    pub fn new() -> Self {
        Self::default()
    }

    /// Folds one record in. Returns true if it became its bucket's best.
    pub fn insert(&mut self, rec: NcpRecord) -> bool {
        self.runs += 1;
        let b = bucket_of(rec.cluster_size);
        match self.buckets.get(&b) {
            Some(cur) if cur.rank_cmp(&rec) != Ordering::Greater => false,
            _ => {
                self.buckets.insert(b, rec);
                true
            }
        }
    }

    pub fn merge(mut self, other: NcpProfile) -> NcpProfile {
        let other_runs = other.runs;
        for (_, rec) in other.buckets {
            self.insert(rec);
            self.runs -= 1;
        }
        self.runs += other_runs;
        self.failures.extend(other.failures);
        self
    }

    pub fn write_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record([
            "bucket_min_size",
            "cluster_size",
            "conductance",
            "seed",
            "algorithm",
            "alpha",
            "epsilon",
            "t",
            "N",
            "K",
            "T",
        ])
        .map_err(csv_err)?;
        for (&b, r) in &self.buckets {
            let p = &r.params;
            w.write_record([
                (1u64 << b).to_string(),
                r.cluster_size.to_string(),
                r.conductance.to_string(),
                r.seed.to_string(),
                p.algorithm.name().to_string(),
                p.alpha.to_string(),
                p.epsilon.to_string(),
                p.t.to_string(),
                p.taylor_degree.to_string(),
                p.max_walk_len.to_string(),
                p.max_iters.to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Format(format!("csv: {other:?}")),
    }
}

/// PR-Nibble (optimized rule) over alpha in {0.001, 0.01, 0.1} and
/// epsilon in {1e-5, 1e-6, 1e-7}; other fields come from `base`.
pub fn default_grid(base: &DiffusionParams) -> Vec<DiffusionParams> {
    let mut grid = Vec::with_capacity(9);
    for alpha in [0.001, 0.01, 0.1] {
        for epsilon in [1e-5, 1e-6, 1e-7] {
            grid.push(DiffusionParams {
                algorithm: Algorithm::PrNibbleOptimized,
                alpha,
                epsilon,
                ..base.clone()
            });
        }
    }
    grid
}

/// `count` distinct vertices drawn uniformly (all of them if `count >= n`).
pub fn random_seeds(g: &Graph, count: usize, rng_seed: u64) -> Vec<VertexId> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let n = g.n();
    rand::seq::index::sample(&mut rng, n, count.min(n))
        .into_iter()
        .map(|v| v as VertexId)
        .collect()
}

fn one_run(g: &Graph, seed: VertexId, params: &DiffusionParams, exec: Execution) -> Result<NcpRecord> {
    let params = DiffusionParams {
        seed: seed as u64,
        ..params.clone()
    };
    let result = diffusion::run(g, &params, exec)?;
    let profile = sweep::sweep(g, &result.p, exec)?;
    Ok(NcpRecord {
        cluster_size: profile.best_index + 1,
        conductance: profile.best_conductance(),
        seed,
        params,
    })
}

/// Runs every (seed, params) pair, sweeps, and keeps the best record per bucket.
/// Failed runs are collected in `failures` rather than aborting.
pub fn run_ncp(
    g: &Graph,
    seeds: &[VertexId],
    grid: &[DiffusionParams],
    exec: Execution,
) -> Result<NcpProfile> {
    if seeds.is_empty() {
        return Err(Error::param("seeds", "at least one seed is required"));
    }
    if grid.is_empty() {
        return Err(Error::param("grid", "at least one parameter setting is required"));
    }
    let pairs: Vec<(VertexId, &DiffusionParams)> = seeds
        .iter()
        .flat_map(|&s| grid.iter().map(move |p| (s, p)))
        .collect();

    let fold = |mut acc: NcpProfile, &(s, p): &(VertexId, &DiffusionParams)| {
        match one_run(g, s, p, exec) {
            Ok(rec) => {
                acc.insert(rec);
            }
            Err(e) => {
                acc.runs += 1;
                acc.failures.push((s, e.to_string()));
            }
        }
        acc
    };
    let mut profile = if exec.is_parallel() {
        pairs
            .par_iter()
            .fold(NcpProfile::new, fold)
            .reduce(NcpProfile::new, NcpProfile::merge)
    } else {
        pairs.iter().fold(NcpProfile::new(), fold)
    };
    profile.failures.sort();
    Ok(profile)
}
