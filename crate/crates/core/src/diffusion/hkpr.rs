//! Deterministic heat-kernel PageRank by level-indexed residual pushes.

use std::collections::VecDeque;

use super::{DiffusionParams, DiffusionResult, IterationView, Observer};
use crate::error::Result;
use crate::frontier::{edge_map, frontier_filter, vertex_map, Execution, Frontier};
use crate::graph::{Graph, VertexId};
use crate::sparse::SparseVec;

/// `values[k] = sum_{m=0}^{N-k} k!/(m+k)! * t^m` for `k = 0..=N`.
#[derive(Clone, Debug, PartialEq)]
pub struct PsiTable {
    pub values: Vec<f64>,
}

impl PsiTable {
    #[inline]
    pub fn get(&self, k: usize) -> f64 {
        self.values[k]
    }
}

pub fn compute_psi(n: u32, t: f64) -> PsiTable {
    let n = n as usize;
    let values = (0..=n)
        .map(|k| {
            let mut term = 1.0;
            let mut sum = 1.0;
            for m in 0..n - k {
                term *= t / (m + k + 1) as f64;
                sum += term;
            }
            sum
        })
        .collect();
    PsiTable { values }
}

/// Mass sent to each neighbour when pushing `rv` at level `j` from a vertex of degree `d`.
#[inline]
fn level_share(t: f64, rv: f64, j: usize, d: usize) -> f64 {
    t * rv / ((j + 1) as f64 * d as f64)
}

struct Thresholds {
    /// `theta * eps / (2N)`
    scale: f64,
    psi: PsiTable,
}

impl Thresholds {
    fn new(params: &DiffusionParams) -> Self {
        let t = params.t;
        let theta = if params.hkpr_threshold_uses_exp_t {
            t.exp()
        } else {
            (-t).exp()
        };
        Thresholds {
            scale: theta * params.epsilon / (2.0 * params.taylor_degree as f64),
            psi: compute_psi(params.taylor_degree, t),
        }
    }

    /// Residual needed at level `next` for vertex `w` to be pushed.
    #[inline]
    fn at(&self, g: &Graph, w: VertexId, next: usize) -> f64 {
        self.scale * g.degree(w) as f64 / self.psi.get(next)
    }
}

pub fn hkpr(g: &Graph, params: &DiffusionParams, exec: Execution) -> Result<DiffusionResult> {
    hkpr_with(g, params, exec, &mut |_| {})
}

/// Levels `0..N-1` push `t/(j+1)` of a vertex's residual onward; level `N-1`
/// spreads its residual straight into `p` and ends the run.
pub fn hkpr_with(
    g: &Graph,
    params: &DiffusionParams,
    exec: Execution,
    observer: Observer<'_>,
) -> Result<DiffusionResult> {
    let seed = params.validate(g)?;
    match exec {
        Execution::Parallel => parallel(g, seed, params, observer),
        Execution::Sequential => sequential(g, seed, params, observer),
    }
}

fn parallel(
    g: &Graph,
    seed: VertexId,
    params: &DiffusionParams,
    observer: Observer<'_>,
) -> Result<DiffusionResult> {
    let exec = Execution::Parallel;
    let levels = params.taylor_degree as usize;
    let t = params.t;
    let thr = Thresholds::new(params);
    let mut out = DiffusionResult::new(params, exec);

    let p = SparseVec::new();
    let mut r = SparseVec::from_entries([(seed, 1.0)]);
    out.entries_created = 1;
    let mut frontier = Frontier::single(seed);
    let mut j = 0usize;

    while !frontier.is_empty() {
        out.push_count += frontier.len() as u64;
        out.pushed_volume += frontier.volume(g);
        out.iterations += 1;
        vertex_map(&frontier, exec, |v| p.accumulate(v, r.get(v)));

        if j + 1 < levels {
            let next = SparseVec::with_capacity(frontier.volume(g) as usize);
            let touched = edge_map(g, &frontier, exec, |s, d| {
                next.accumulate(d, level_share(t, r.get(s), j, g.degree(s)))
            });
            out.edges_touched += touched.edges_visited;
            frontier = frontier_filter(&touched.touched, exec, |w| next.get(w) >= thr.at(g, w, j + 1));
            out.entries_created += next.len() as u64;
            r = next;
            j += 1;
        } else {
            let touched = edge_map(g, &frontier, exec, |s, d| {
                p.accumulate(d, r.get(s) / g.degree(s) as f64)
            });
            out.edges_touched += touched.edges_visited;
            frontier = Frontier::empty();
        }
        observer(&IterationView {
            iteration: out.iterations,
            p: &p,
            residual: Some(&r),
            frontier: frontier.as_slice(),
        });
    }
    out.entries_created += p.len() as u64;
    out.p = p;
    Ok(out)
}

fn sequential(
    g: &Graph,
    seed: VertexId,
    params: &DiffusionParams,
    observer: Observer<'_>,
) -> Result<DiffusionResult> {
    let levels = params.taylor_degree as usize;
    let t = params.t;
    let thr = Thresholds::new(params);
    let mut out = DiffusionResult::new(params, Execution::Sequential);

    let p = SparseVec::new();
    let r: Vec<SparseVec> = (0..levels).map(|_| SparseVec::new()).collect();
    r[0].accumulate(seed, 1.0);
    let mut queue = VecDeque::from([(seed, 0usize)]);

    while let Some((v, j)) = queue.pop_front() {
        let d = g.degree(v);
        let rv = r[j].get(v);
        out.push_count += 1;
        out.pushed_volume += d as u64;
        out.iterations += 1;
        p.accumulate(v, rv);

        if j + 1 == levels {
            for &w in g.neighbors(v) {
                p.accumulate(w, rv / d as f64);
            }
        } else {
            let share = level_share(t, rv, j, d);
            for &w in g.neighbors(v) {
                let old = r[j + 1].fetch_add(w, share);
                let need = thr.at(g, w, j + 1);
                if old < need && old + share >= need {
                    queue.push_back((w, j + 1));
                }
            }
        }
        out.edges_touched += d as u64;
        observer(&IterationView {
            iteration: out.iterations,
            p: &p,
            residual: Some(&r[j]),
            frontier: &[v],
        });
    }
    out.entries_created = (p.len() + r.iter().map(SparseVec::len).sum::<usize>()) as u64;
    out.p = p;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::Algorithm;
    use crate::generators::{random_graph, triangle};

    const MODES: [Execution; 2] = [Execution::Sequential, Execution::Parallel];

    fn params(seed: u64, n: u32, t: f64, eps: f64) -> DiffusionParams {
        DiffusionParams {
            algorithm: Algorithm::Hkpr,
            seed,
            taylor_degree: n,
            t,
            epsilon: eps,
            ..Default::default()
        }
    }

    #[test]
    fn psi_small_table() {
        let psi = compute_psi(2, 1.0);
        let want = [2.5, 1.5, 1.0];
        for (a, b) in psi.values.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(compute_psi(0, 3.0).values, vec![1.0]);
    }

    #[test]
    fn psi_is_one_at_n_and_non_increasing() {
        for (n, t) in [(1, 0.5), (10, 3.0), (50, 20.0), (7, 1e-3)] {
            let psi = compute_psi(n, t);
            assert_eq!(psi.values[n as usize], 1.0);
            assert!(psi.values.windows(2).all(|w| w[0] >= w[1]));
            assert!(psi.values.iter().all(|&x| x >= 1.0));
        }
    }

    #[test]
    fn single_level_is_the_last_round() {
        let g = triangle();
        for exec in MODES {
            let r = hkpr(&g, &params(0, 1, 1.0, 1e-4), exec).unwrap();
            assert_eq!(r.p.sorted_entries(), vec![(0, 1.0), (1, 0.5), (2, 0.5)]);
        }
    }

    #[test]
    fn huge_epsilon_stops_after_level_zero() {
        let g = triangle();
        for exec in MODES {
            let r = hkpr(&g, &params(0, 2, 1.0, 1e6), exec).unwrap();
            assert_eq!(r.p.sorted_entries(), vec![(0, 1.0)]);
            assert_eq!(r.push_count, 1);
        }
    }

    #[test]
    fn isolated_seed_keeps_its_mass() {
        let g = Graph::from_edges_with_n(&[(0, 1)], 3);
        for exec in MODES {
            let r = hkpr(&g, &params(2, 4, 2.0, 1e-6), exec).unwrap();
            assert_eq!(r.p.sorted_entries(), vec![(2, 1.0)]);
        }
    }

    #[test]
    fn exp_t_flag_raises_the_threshold() {
        let g = random_graph(200, 6.0, true, 4);
        let mut a = params(5, 10, 3.0, 1e-4);
        let low = hkpr(&g, &a, Execution::Parallel).unwrap();
        a.hkpr_threshold_uses_exp_t = true;
        let high = hkpr(&g, &a, Execution::Parallel).unwrap();
        assert!(high.push_count < low.push_count);
    }

    #[test]
    fn parallel_matches_sequential() {
        for s in 0..5 {
            let g = random_graph(500, 6.0, s % 2 == 0, 100 + s);
            let prm = params(s, 12, 5.0, 1e-5);
            let a = hkpr(&g, &prm, Execution::Sequential).unwrap();
            let b = hkpr(&g, &prm, Execution::Parallel).unwrap();
            let (ea, eb) = (a.p.sorted_entries(), b.p.sorted_entries());
            assert_eq!(ea.len(), eb.len());
            for ((va, xa), (vb, xb)) in ea.into_iter().zip(eb) {
                assert_eq!(va, vb);
                assert!((xa - xb).abs() <= 1e-12 * xa.abs().max(xb.abs()));
            }
            assert_eq!(a.push_count, b.push_count);
            assert_eq!(a.pushed_volume, b.pushed_volume);
        }
    }
}
