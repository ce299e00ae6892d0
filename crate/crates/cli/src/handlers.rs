//! Request handling shared by the HTTP routes and the CLI. Each handler is a
//! plain function over an immutable graph.

use std::time::Instant;

use lgc::diffusion::IterationView;
use lgc::graph::VertexSet;
use lgc::{diffusion, sweep, Error, Execution, Graph, SparseVec, SweepProfile, VertexId};

use crate::api::{
    ApiError, ClusterRequest, ClusterResponse, Counters, CurvePoint, DegreeBucket, GraphStats,
    IterationSweep, MassCheck, NeighborsResponse, SweepRequest, SweepResponse, Timings, API_VERSION,
};

pub const DEFAULT_NEIGHBOR_LIMIT: usize = 100;

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

fn mode(sequential: bool) -> Execution {
    if sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

pub fn handle_cluster(g: &Graph, req: &ClusterRequest) -> Result<ClusterResponse, ApiError> {
    let total = Instant::now();
    let params = req.to_params()?;
    params.validate(g)?;
    let exec = mode(req.sequential);

    let start = Instant::now();
    let mut iteration_sweeps = Vec::new();
    let result = if req.sweep_each_iteration {
        diffusion::run_with(g, &params, exec, &mut |view: &IterationView<'_>| {
            let best = sweep::sweep(g, view.p, exec).ok();
            iteration_sweeps.push(IterationSweep {
                iteration: view.iteration,
                best_prefix_size: best.as_ref().map_or(0, |b| b.best_index + 1),
                conductance: best.as_ref().map(|b| b.best_conductance()),
            });
        })?
    } else {
        diffusion::run(g, &params, exec)?
    };
    let diffusion_ms = ms(start);

    let start = Instant::now();
    let profile = if req.run_sweep {
        match sweep::sweep(g, &result.p, exec) {
            Ok(p) => Some(p),
            // nothing sweepable (empty p, or mass only on isolated vertices)
            Err(Error::EmptySweep) => None,
            Err(e) => return Err(e.into()),
        }
    } else {
        None
    };
    let sweep_ms = ms(start);

    let mut cluster: Vec<VertexId> = match (&profile, req.run_sweep) {
        (Some(p), _) => p.best_set().to_vec(),
        (None, true) => Vec::new(),
        (None, false) => result
            .p
            .entries()
            .into_iter()
            .filter(|&(_, x)| x > 0.0)
            .map(|(v, _)| v)
            .collect(),
    };
    cluster.sort_unstable();

    let set = VertexSet::new(g, cluster.iter().copied())?;
    let conductance = if set.is_empty() {
        None
    } else {
        Some(g.conductance(&set)?)
    };

    let mass_check = result.residual.as_ref().map(|r| {
        let p_mass = result.p.l1_norm();
        let residual_mass = r.l1_norm();
        MassCheck {
            p_mass,
            residual_mass,
            conserved: (p_mass + residual_mass - 1.0).abs() <= 1e-9,
        }
    });

    Ok(ClusterResponse {
        v: API_VERSION,
        algorithm: params.algorithm,
        cluster_volume: g.volume(&set),
        support_size: result.p.support_size(),
        sweep_curve: profile
            .as_ref()
            .map(|p| {
                p.curve()
                    .into_iter()
                    .map(|(prefix_size, conductance)| CurvePoint { prefix_size, conductance })
                    .collect()
            })
            .unwrap_or_default(),
        best_prefix_size: profile.as_ref().map(|p| p.best_index + 1),
        counters: Counters {
            iterations: result.iterations,
            push_count: result.push_count,
            pushed_volume: result.pushed_volume,
            edges_touched: result.edges_touched,
            entries_created: result.entries_created,
        },
        mass_check,
        iteration_sweeps,
        wall_time_ms: Timings {
            diffusion: diffusion_ms,
            sweep: sweep_ms,
            total: ms(total),
        },
        params,
        cluster,
        conductance,
    })
}

pub fn handle_sweep(g: &Graph, req: &SweepRequest) -> Result<SweepResponse, ApiError> {
    let p = SparseVec::with_capacity(req.entries.len());
    for &(v, x) in &req.entries {
        if !g.contains(v) {
            return Err(ApiError::bad_request(
                "out_of_range",
                format!("vertex {v} out of range for graph with {} vertices", g.n()),
                Some("entries"),
            ));
        }
        if !x.is_finite() {
            return Err(ApiError::bad_request("invalid_param", "masses must be finite", Some("entries")));
        }
        p.accumulate(v as VertexId, x);
    }
    let profile = sweep::sweep(g, &p, mode(req.sequential))?;
    Ok(sweep_response(profile))
}

pub fn sweep_response(p: SweepProfile) -> SweepResponse {
    SweepResponse {
        v: API_VERSION,
        best_set: p.best_set().to_vec(),
        best_conductance: p.best_conductance(),
        best_index: p.best_index,
        order: p.order,
        prefix_volume: p.prefix_volume,
        prefix_crossing: p.prefix_crossing,
        prefix_conductance: p.prefix_conductance,
    }
}

/// Degree bucket: 0 for isolated vertices, otherwise `1 + floor(log2 d)`.
fn degree_bucket(d: usize) -> usize {
    if d == 0 {
        0
    } else {
        1 + lgc::ncp::bucket_of(d) as usize
    }
}

pub fn handle_graph_stats(g: &Graph) -> GraphStats {
    let mut counts: Vec<u64> = Vec::new();
    for v in 0..g.n() as VertexId {
        let b = degree_bucket(g.degree(v));
        if counts.len() <= b {
            counts.resize(b + 1, 0);
        }
        counts[b] += 1;
    }
    let degree_histogram = counts
        .into_iter()
        .enumerate()
        .filter(|&(_, c)| c > 0)
        .map(|(b, count)| {
            let (min_degree, max_degree) = match b {
                0 => (0, 0),
                b => (1u64 << (b - 1), (1u64 << b) - 1),
            };
            DegreeBucket { min_degree, max_degree, count }
        })
        .collect();
    GraphStats {
        v: API_VERSION,
        n: g.n() as u64,
        m: g.m() as u64,
        max_degree: g.max_degree() as u64,
        degree_histogram,
    }
}

pub fn handle_neighbors(g: &Graph, id: u64, limit: Option<usize>) -> Result<NeighborsResponse, ApiError> {
    let v = g.check_vertex(id).map_err(|e| ApiError {
        field: Some("id".into()),
        ..ApiError::from(e)
    })?;
    let limit = limit.unwrap_or(DEFAULT_NEIGHBOR_LIMIT);
    let all = g.neighbors(v);
    let shown = &all[..all.len().min(limit)];
    Ok(NeighborsResponse {
        v: API_VERSION,
        vertex: v,
        degree: all.len() as u64,
        neighbors: shown.to_vec(),
        truncated: shown.len() < all.len(),
    })
}
