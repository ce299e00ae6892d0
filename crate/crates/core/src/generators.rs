//! Small fixtures and synthetic graph generators used by tests, benchmarks and the CLI.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{build_graph, Graph, VertexId};

/// K3 on vertices 0, 1, 2.
pub fn triangle() -> Graph {
    Graph::from_edges(&[(0, 1), (1, 2), (0, 2)], true)
}

/// Path `0 - 1 - ... - (len-1)`.
pub fn path(len: usize) -> Graph {
    let edges: Vec<_> = (1..len as VertexId).map(|v| (v - 1, v)).collect();
    Graph::from_edges_with_n(&edges, len)
}

/// The eight-vertex, eight-edge sweep example.
///
/// Vertices A, B, C, D are ids 0..=3 with degrees 2, 2, 3, 4. Internal edges
/// are A-B, A-C, B-C and C-D; D also reaches the outside vertices 4, 5, 6,
/// and the remaining edge 6-7 lies entirely outside {A, B, C, D}. With sorted
/// adjacency the enumeration order is A:[B,C], B:[A,C], C:[A,B,D], D:[C,4,5,6].
pub fn worked_example() -> Graph {
    Graph::from_edges(
        &[(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (3, 5), (3, 6), (6, 7)],
        true,
    )
}

/// Uniform random graph with `n` vertices and about `n * avg_degree / 2` edges.
/// With `connected`, a random spanning tree is added first.
pub fn random_graph(n: usize, avg_degree: f64, connected: bool, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::new();
    if n >= 2 && connected {
        for v in 1..n as u64 {
            pairs.push((rng.gen_range(0..v), v));
        }
    }
    if n >= 2 {
        let target = (n as f64 * avg_degree / 2.0).round() as usize;
        for _ in 0..target {
            pairs.push((rng.gen_range(0..n as u64), rng.gen_range(0..n as u64)));
        }
    }
    build_graph(&pairs, true, Some(n)).expect("generator produces valid ids")
}

/// Planted-partition graph: `communities` blocks of `size` vertices. Each vertex
/// draws `intra` edges inside its block and `inter` edges to uniformly random
/// vertices anywhere.
pub fn community_graph(communities: usize, size: usize, intra: usize, inter: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = communities * size;
    let mut pairs = Vec::with_capacity(n * (intra + inter));
    for v in 0..n {
        let base = (v / size) * size;
        for _ in 0..intra {
            pairs.push((v as u64, (base + rng.gen_range(0..size)) as u64));
        }
        for _ in 0..inter {
            pairs.push((v as u64, rng.gen_range(0..n) as u64));
        }
    }
    build_graph(&pairs, true, Some(n)).expect("generator produces valid ids")
}

/// Locality-biased random graph: every vertex draws `per_vertex` edges to ids at
/// a distance sampled log-uniformly from `1..n/2`, so near ids are far more
/// likely than distant ones.
pub fn rand_local(n: usize, per_vertex: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(n * per_vertex);
    let max_dist = (n / 2).max(1) as f64;
    for v in 0..n {
        for _ in 0..per_vertex {
            let dist = max_dist.powf(rng.gen::<f64>()).floor().max(1.0) as usize;
            let w = if rng.gen::<bool>() {
                (v + dist) % n
            } else {
                (v + n - dist % n) % n
            };
            pairs.push((v as u64, w as u64));
        }
    }
    build_graph(&pairs, true, Some(n)).expect("generator produces valid ids")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example_shape() {
        let g = worked_example();
        assert_eq!((g.n(), g.m()), (8, 8));
        assert_eq!((0..4).map(|v| g.degree(v)).collect::<Vec<_>>(), vec![2, 2, 3, 4]);
        assert_eq!(g.neighbors(3), &[2, 4, 5, 6]);
    }

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(random_graph(50, 4.0, true, 9), random_graph(50, 4.0, true, 9));
        assert_eq!(rand_local(200, 5, 1), rand_local(200, 5, 1));
        let g = community_graph(4, 25, 6, 1, 2);
        assert_eq!(g.n(), 100);
    }

    #[test]
    fn connected_random_graph_has_no_isolated_vertices() {
        let g = random_graph(300, 2.0, true, 5);
        assert!((0..300).all(|v| g.degree(v) > 0));
    }
}
