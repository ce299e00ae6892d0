use std::collections::HashSet;
use std::io::{BufReader, Write};

use lgc::generators::{random_graph, worked_example};
use lgc::graph::{build_graph, parse_edge_list, VertexSet};
use lgc::{Error, Graph, VertexId};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn scan_conductance(g: &Graph, members: &HashSet<VertexId>) -> f64 {
    let mut cut = 0u64;
    let mut vol = 0u64;
    for u in 0..g.n() as VertexId {
        for &w in g.neighbors(u) {
            if members.contains(&u) {
                vol += 1;
                if !members.contains(&w) {
                    cut += 1;
                }
            }
        }
    }
    let other = 2 * g.m() as u64 - vol;
    match vol.min(other) {
        0 => 1.0,
        d => cut as f64 / d as f64,
    }
}

#[test]
fn conductance_matches_edge_scan_on_random_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for case in 0..1000u64 {
        let n = rng.gen_range(1..=200);
        let g = random_graph(n, rng.gen_range(0.5..6.0), case % 2 == 0, case);
        let k = rng.gen_range(1..=n);
        let members: HashSet<VertexId> = (0..k).map(|_| rng.gen_range(0..n as VertexId)).collect();
        let set = VertexSet::new(&g, members.iter().copied()).unwrap();
        assert_eq!(g.conductance(&set).unwrap(), scan_conductance(&g, &members), "case {case}");
    }
}

#[test]
fn worked_example_conductance() {
    let g = worked_example();
    let s = VertexSet::new(&g, [0, 1, 2]).unwrap();
    assert_eq!(g.boundary(&s), 1);
    assert_eq!(g.volume(&s), 7);
    assert_eq!(g.conductance(&s).unwrap(), 1.0 / 7.0);
    let all = VertexSet::new(&g, 0..8).unwrap();
    assert_eq!(g.conductance(&all).unwrap(), 1.0);
    let empty = VertexSet::new(&g, []).unwrap();
    assert!(matches!(g.conductance(&empty), Err(Error::EmptySet)));
}

proptest! {
    #[test]
    fn complement_has_equal_conductance(
        seed in 0u64..10_000,
        n in 2usize..120,
        picks in proptest::collection::vec(0u32..120, 1..60),
    ) {
        let g = random_graph(n, 3.0, false, seed);
        let set = VertexSet::new(&g, picks.into_iter().filter(|&v| (v as usize) < n)).unwrap();
        prop_assume!(!set.is_empty() && set.len() < n);
        let comp = set.complement(&g);
        prop_assert_eq!(g.volume(&set) + g.volume(&comp), g.total_volume());
        prop_assert_eq!(g.conductance(&set).unwrap(), g.conductance(&comp).unwrap());
    }

    #[test]
    fn build_is_idempotent(seed in 0u64..10_000, n in 1usize..300) {
        let g = random_graph(n, 4.0, seed % 2 == 0, seed);
        let pairs: Vec<(u64, u64)> = g.edges().map(|(u, v)| (u as u64, v as u64)).collect();
        let again = build_graph(&pairs, true, Some(n)).unwrap();
        prop_assert_eq!(&again, &g);
    }

    #[test]
    fn binary_round_trip(seed in 0u64..10_000, n in 0usize..300) {
        let g = random_graph(n, 4.0, false, seed);
        let mut buf = Vec::new();
        g.write_binary(&mut buf).unwrap();
        prop_assert_eq!(buf.len(), 28 + if n == 0 { 0 } else { 8 * (n + 1) + 16 * g.m() });
        prop_assert_eq!(Graph::read_binary(buf.as_slice()).unwrap(), g);
    }
}

#[test]
fn edge_list_file_to_binary_file() {
    let dir = tempfile::tempdir().unwrap();
    let text = dir.path().join("edges.txt");
    std::fs::write(&text, "# comment\n0 1\n1 2\n2 0\n2 3\n").unwrap();
    let pairs = parse_edge_list(BufReader::new(std::fs::File::open(&text).unwrap())).unwrap();
    let g = build_graph(&pairs, true, None).unwrap();
    assert_eq!((g.n(), g.m()), (4, 4));

    let bin = dir.path().join("g.bin");
    let mut f = std::fs::File::create(&bin).unwrap();
    g.write_binary(&mut f).unwrap();
    f.flush().unwrap();
    let back = Graph::read_binary(std::fs::File::open(&bin).unwrap()).unwrap();
    assert_eq!(back, g);
}

#[test]
fn inconsistent_edge_count_is_rejected() {
    let g = worked_example();
    let mut buf = Vec::new();
    g.write_binary(&mut buf).unwrap();
    // Claim one more edge than the offsets describe.
    buf[12..20].copy_from_slice(&9u64.to_le_bytes());
    let err = Graph::read_binary(buf.as_slice()).unwrap_err();
    assert!(matches!(err, Error::Format(_)), "{err}");
}
