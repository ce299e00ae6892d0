//! Sweep-cut rounding: order vertices by `p[v] / d(v)` and report the
//! conductance of every prefix of that order.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{conductance_from_counts, Graph, VertexId};
use crate::primitives::{argmin_first, exclusive_scan, filter, integer_sort_by_key, Execution};
use crate::sparse::{AtomicTable, SparseVec};

/// Per-prefix volume, boundary and conductance for a sweep order.
///
/// Index `j` describes the prefix `order[..=j]`. Equality ignores
/// `touched_elements`, which differs between the two implementations.
#[derive(Clone, Debug, Serialize)]
pub struct SweepProfile {
    pub order: Vec<VertexId>,
    pub prefix_volume: Vec<u64>,
    pub prefix_crossing: Vec<u64>,
    pub prefix_conductance: Vec<f64>,
    /// Index of the first prefix with minimum conductance.
    pub best_index: usize,
    /// Elements read or written while building the profile, for locality checks.
    pub touched_elements: u64,
}

impl PartialEq for SweepProfile {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order
            && self.prefix_volume == other.prefix_volume
            && self.prefix_crossing == other.prefix_crossing
            && self.prefix_conductance == other.prefix_conductance
            && self.best_index == other.best_index
    }
}

impl SweepProfile {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn best_set(&self) -> &[VertexId] {
        &self.order[..=self.best_index]
    }

    pub fn best_conductance(&self) -> f64 {
        self.prefix_conductance[self.best_index]
    }

    pub fn best_volume(&self) -> u64 {
        self.prefix_volume[self.best_index]
    }

    /// `(prefix size, conductance)` for every prefix.
    pub fn curve(&self) -> Vec<(usize, f64)> {
        self.prefix_conductance
            .iter()
            .enumerate()
            .map(|(i, &c)| (i + 1, c))
            .collect()
    }
}

/// Positive-mass, positive-degree vertices by `p[v]/d(v)` descending, ties by id.
pub fn rank_order(g: &Graph, p: &SparseVec, exec: Execution) -> Result<Vec<VertexId>> {
    let mut isolated = 0usize;
    let mut keyed: Vec<(f64, VertexId)> = p
        .entries()
        .into_iter()
        .filter(|&(_, x)| x > 0.0)
        .filter(|&(v, _)| {
            let keep = g.degree(v) > 0;
            isolated += usize::from(!keep);
            keep
        })
        .map(|(v, x)| (x / g.degree(v) as f64, v))
        .collect();
    if isolated > 0 {
        log::warn!("sweep: dropped {isolated} degree-0 vertices carrying mass");
    }
    if keyed.is_empty() {
        return Err(Error::EmptySweep);
    }
    let cmp = |a: &(f64, VertexId), b: &(f64, VertexId)| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1));
    if exec.is_parallel() {
        keyed.par_sort_unstable_by(cmp);
    } else {
        keyed.sort_unstable_by(cmp);
    }
    Ok(keyed.into_iter().map(|(_, v)| v).collect())
}

pub fn sweep(g: &Graph, p: &SparseVec, exec: Execution) -> Result<SweepProfile> {
    match exec {
        Execution::Sequential => sweep_sequential(g, p),
        Execution::Parallel => sweep_parallel(g, p),
    }
}

pub fn sweep_sequential(g: &Graph, p: &SparseVec) -> Result<SweepProfile> {
    let order = rank_order(g, p, Execution::Sequential)?;
    Ok(sweep_sequential_order(g, order))
}

pub fn sweep_parallel(g: &Graph, p: &SparseVec) -> Result<SweepProfile> {
    let order = rank_order(g, p, Execution::Parallel)?;
    Ok(sweep_parallel_order(g, order))
}

/// Incremental sweep over a given order: each new vertex flips the crossing
/// status of its edges.
pub fn sweep_sequential_order(g: &Graph, order: Vec<VertexId>) -> SweepProfile {
    let total = g.total_volume();
    let mut in_set = HashSet::with_capacity(order.len());
    let mut volume = 0u64;
    let mut crossing = 0i64;
    let mut prefix_volume = Vec::with_capacity(order.len());
    let mut prefix_crossing = Vec::with_capacity(order.len());
    let mut prefix_conductance = Vec::with_capacity(order.len());
    let mut touched = 0u64;

    for &v in &order {
        volume += g.degree(v) as u64;
        for &w in g.neighbors(v) {
            crossing += if in_set.contains(&w) { -1 } else { 1 };
        }
        touched += 1 + g.degree(v) as u64;
        in_set.insert(v);
        prefix_volume.push(volume);
        prefix_crossing.push(crossing as u64);
        prefix_conductance.push(conductance_from_counts(crossing as u64, volume, total));
    }
    let best_index = argmin_first(&prefix_conductance, Execution::Sequential).unwrap_or(0);
    SweepProfile {
        order,
        prefix_volume,
        prefix_crossing,
        prefix_conductance,
        best_index,
        touched_elements: touched,
    }
}

fn rank_table(order: &[VertexId]) -> AtomicTable {
    let ranks = AtomicTable::with_capacity(order.len());
    order.par_iter().enumerate().for_each(|(i, &v)| {
        ranks.update(v as u64, |_| i as u64 + 1);
    });
    ranks
}

/// The pair array built by the parallel sweep: two `(delta, rank)` pairs per
/// edge leaving an ordered vertex, laid out in order then adjacency order.
/// Ranks are 1-based; vertices outside `order` have rank `order.len() + 1`.
pub fn crossing_pairs(g: &Graph, order: &[VertexId]) -> Vec<(i64, usize)> {
    let ranks = rank_table(order);
    let degrees: Vec<u64> = order.par_iter().map(|&v| g.degree(v) as u64).collect();
    let (offsets, volume) = exclusive_scan(&degrees, Execution::Parallel);
    emit_pairs(g, order, &ranks, &offsets, volume)
}

fn emit_pairs(
    g: &Graph,
    order: &[VertexId],
    ranks: &AtomicTable,
    offsets: &[u64],
    volume: u64,
) -> Vec<(i64, usize)> {
    let outside = order.len() + 1;
    let rank_of = |w: VertexId| ranks.get(w as u64).map_or(outside, |r| r as usize);
    let mut z = vec![(0i64, 0usize); 2 * volume as usize];
    // Each vertex owns z[2*offset .. 2*(offset + degree)].
    let mut slices: Vec<&mut [(i64, usize)]> = Vec::with_capacity(order.len());
    let mut rest = z.as_mut_slice();
    for (i, &v) in order.iter().enumerate() {
        debug_assert_eq!(
            offsets[i] * 2,
            (2 * volume) - rest.len() as u64,
            "offsets out of sync"
        );
        let (head, tail) = rest.split_at_mut(2 * g.degree(v));
        slices.push(head);
        rest = tail;
    }
    slices
        .into_par_iter()
        .zip(order.par_iter().enumerate())
        .for_each(|(out, (i, &v))| {
            let rv = i + 1;
            for (k, &w) in g.neighbors(v).iter().enumerate() {
                let rw = rank_of(w);
                if rw > rv {
                    out[2 * k] = (1, rv);
                    out[2 * k + 1] = (-1, rw);
                } else {
                    out[2 * k] = (0, rv);
                    out[2 * k + 1] = (0, rw);
                }
            }
        });
    z
}

/// Sweep built from prefix sums and an integer sort of the pair array. Gives
/// the same profile as [`sweep_sequential_order`].
pub fn sweep_parallel_order(g: &Graph, order: Vec<VertexId>) -> SweepProfile {
    let exec = Execution::Parallel;
    let n_set = order.len();
    let total = g.total_volume();

    let ranks = rank_table(&order);
    let degrees: Vec<u64> = order.par_iter().map(|&v| g.degree(v) as u64).collect();
    let (offsets, volume) = exclusive_scan(&degrees, exec);
    let prefix_volume: Vec<u64> = offsets
        .par_iter()
        .zip(degrees.par_iter())
        .map(|(o, d)| o + d)
        .collect();

    let z = emit_pairs(g, &order, &ranks, &offsets, volume);
    let sorted = integer_sort_by_key(&z, n_set + 1, exec, |pair| pair.1);
    let mut sums: Vec<i64> = sorted.par_iter().map(|pair| pair.0).collect();
    crate::primitives::inclusive_scan(&mut sums, exec);

    // Last position holding each rank 1..=N.
    let positions: Vec<usize> = (0..sorted.len()).collect();
    let ends = filter(&positions, exec, |&j| {
        sorted[j].1 <= n_set && (j + 1 == sorted.len() || sorted[j + 1].1 != sorted[j].1)
    });
    debug_assert_eq!(ends.len(), n_set);
    let prefix_crossing: Vec<u64> = ends.par_iter().map(|&j| sums[j] as u64).collect();

    let prefix_conductance: Vec<f64> = prefix_crossing
        .par_iter()
        .zip(prefix_volume.par_iter())
        .map(|(&c, &v)| conductance_from_counts(c, v, total))
        .collect();
    let best_index = argmin_first(&prefix_conductance, exec).unwrap_or(0);

    SweepProfile {
        order,
        prefix_volume,
        prefix_crossing,
        prefix_conductance,
        best_index,
        touched_elements: n_set as u64 + 2 * volume,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{random_graph, triangle, worked_example};
    use crate::graph::VertexSet;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Masses giving ratios 4, 3, 2, 1 on A, B, C, D.
    fn worked_p() -> SparseVec {
        SparseVec::from_entries([(0, 8.0), (1, 6.0), (2, 6.0), (3, 4.0)])
    }

    #[test]
    fn rank_order_examples() {
        let g = Graph::from_edges(&[(0, 1), (1, 2), (2, 3), (3, 0), (0, 4), (4, 2)], true);
        let p = SparseVec::from_entries([(3, 0.5), (1, 0.5)]);
        assert_eq!(rank_order(&g, &p, Execution::Sequential).unwrap(), vec![1, 3]);

        // d(0) = 3 -> 0.3, d(1) = 2 -> 0.4
        let p = SparseVec::from_entries([(0, 0.9), (1, 0.8)]);
        assert_eq!(rank_order(&g, &p, Execution::Parallel).unwrap(), vec![1, 0]);

        let p = SparseVec::from_entries([(2, 0.1)]);
        assert_eq!(rank_order(&g, &p, Execution::Parallel).unwrap(), vec![2]);
    }

    #[test]
    fn empty_and_isolated_inputs() {
        let g = Graph::from_edges_with_n(&[(0, 1)], 3);
        let p = SparseVec::from_entries([(0, 0.0), (1, -1.0)]);
        assert!(matches!(sweep_sequential(&g, &p), Err(Error::EmptySweep)));
        let p = SparseVec::from_entries([(2, 1.0)]);
        assert!(matches!(sweep_parallel(&g, &p), Err(Error::EmptySweep)));
        let p = SparseVec::from_entries([(2, 1.0), (0, 0.5)]);
        assert_eq!(sweep_parallel(&g, &p).unwrap().order, vec![0]);
    }

    #[test]
    fn worked_example_both_sweeps() {
        let g = worked_example();
        for (prof, touched) in [
            (sweep_sequential(&g, &worked_p()).unwrap(), 4 + 11),
            (sweep_parallel(&g, &worked_p()).unwrap(), 4 + 22),
        ] {
            assert_eq!(prof.order, vec![0, 1, 2, 3]);
            assert_eq!(prof.prefix_volume, vec![2, 4, 7, 11]);
            assert_eq!(prof.prefix_crossing, vec![2, 2, 1, 3]);
            assert_eq!(prof.best_set(), &[0, 1, 2]);
            assert_eq!(prof.best_conductance(), 1.0 / 7.0);
            assert_eq!(prof.curve()[0], (1, 1.0));
            assert_eq!(prof.touched_elements, touched);
        }
    }

    #[test]
    fn worked_example_pairs() {
        let z = crossing_pairs(&worked_example(), &[0, 1, 2, 3]);
        let expected: Vec<(i64, usize)> = vec![
            (1, 1), (-1, 2), (1, 1), (-1, 3), (0, 2), (0, 1), (1, 2), (-1, 3), (0, 3), (0, 1),
            (0, 3), (0, 2), (1, 3), (-1, 4), (0, 4), (0, 3), (1, 4), (-1, 5), (1, 4), (-1, 5),
            (1, 4), (-1, 5),
        ];
        assert_eq!(z, expected);
    }

    #[test]
    fn triangle_full_set_has_conductance_one() {
        let g = triangle();
        let p = SparseVec::from_entries([(0, 0.5), (1, 0.3), (2, 0.2)]);
        let prof = sweep_parallel(&g, &p).unwrap();
        // {0}: 2/min(2,4) = 1; {0,1}: 2/min(4,2) = 1; all: denominator 0 -> 1
        assert_eq!(prof.prefix_conductance, vec![1.0, 1.0, 1.0]);
        assert_eq!(prof.best_index, 0);
    }

    #[test]
    fn random_inputs_agree_with_recount() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for case in 0..40 {
            let n = rng.gen_range(2..200);
            let g = random_graph(n, rng.gen_range(1.0..6.0), case % 3 == 0, case);
            let p = SparseVec::new();
            for _ in 0..rng.gen_range(1..n) {
                p.accumulate(rng.gen_range(0..n as u32), rng.gen_range(0.0..1.0));
            }
            let Ok(a) = sweep_sequential(&g, &p) else { continue };
            let b = sweep_parallel(&g, &p).unwrap();
            assert_eq!(a, b);
            for j in 0..a.len() {
                let s = VertexSet::new(&g, a.order[..=j].iter().copied()).unwrap();
                assert_eq!(a.prefix_crossing[j], g.boundary(&s));
                assert_eq!(a.prefix_volume[j], g.volume(&s));
            }
        }
    }
}
