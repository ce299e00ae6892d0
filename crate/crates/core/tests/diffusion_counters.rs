use lgc::diffusion::{self, IterationView};
use lgc::generators::{community_graph, rand_local};
use lgc::{sweep, Algorithm, DiffusionParams, Execution};

const MODES: [Execution; 2] = [Execution::Sequential, Execution::Parallel];

fn params(algorithm: Algorithm, seed: u64) -> DiffusionParams {
    DiffusionParams {
        algorithm,
        seed,
        epsilon: 1e-5,
        alpha: 0.05,
        max_iters: 15,
        t: 5.0,
        taylor_degree: 10,
        num_walks: 5_000,
        max_walk_len: 8,
        rng_seed: 3,
        ..Default::default()
    }
}

#[test]
fn entries_are_bounded_by_pushed_work() {
    let g = rand_local(200_000, 5, 1);
    for alg in [
        Algorithm::Nibble,
        Algorithm::PrNibbleOriginal,
        Algorithm::PrNibbleOptimized,
        Algorithm::Hkpr,
    ] {
        for exec in MODES {
            let r = diffusion::run(&g, &params(alg, 100), exec).unwrap();
            // the +1 is the seed's initial entry
            assert!(
                r.entries_created <= 1 + r.push_count + r.pushed_volume,
                "{alg} {exec:?}: {} entries, {} pushes, {} volume",
                r.entries_created,
                r.push_count,
                r.pushed_volume
            );
        }
    }
    let r = diffusion::run(&g, &params(Algorithm::RandHkpr, 100), Execution::Parallel).unwrap();
    assert!(r.entries_created <= r.params.num_walks);
}

#[test]
fn every_algorithm_finds_the_seed_community() {
    // 8 blocks of 100 with few cross edges. The best sweep set may merge a
    // neighbouring block (such unions can score lower), but it must cover the seed's.
    let g = community_graph(8, 100, 10, 1, 77);
    for alg in Algorithm::ALL {
        let mut prm = params(alg, 250);
        prm.num_walks = 50_000;
        prm.max_iters = 30;
        let r = diffusion::run(&g, &prm, Execution::Parallel).unwrap();
        let prof = sweep::sweep_parallel(&g, &r.p).unwrap();
        let inside = prof.best_set().iter().filter(|&&v| v / 100 == 2).count();
        assert!(inside >= 90, "{alg}: {inside} of the seed block's 100 vertices found");
        assert!(prof.best_set().len() <= 300, "{alg}: {} vertices", prof.best_set().len());
        assert!(prof.best_conductance() < 0.3, "{alg}: {}", prof.best_conductance());
    }
}

#[test]
fn observers_see_every_round() {
    let g = community_graph(4, 50, 6, 1, 5);
    for alg in [Algorithm::Nibble, Algorithm::PrNibbleOptimized, Algorithm::Hkpr] {
        for exec in MODES {
            let mut calls = 0u64;
            let r = diffusion::run_with(&g, &params(alg, 0), exec, &mut |v: &IterationView<'_>| {
                calls += 1;
                assert_eq!(v.iteration, calls);
            })
            .unwrap();
            assert_eq!(calls, r.iterations, "{alg} {exec:?}");
        }
    }
}
