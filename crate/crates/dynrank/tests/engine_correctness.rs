//! Engine outputs checked against oracles that share no code with the
//! library: a push-style dense power iteration and, for tiny graphs, a
//! direct linear solve.

mod common;

use common::{edges_after, linf, oracle_pagerank, random_graph, solve_pagerank};
use dynrank::engines::{
    linf_norm, nd_bb, nd_lf, rank_contribution, run_engine, EngineId, PageRankConfig,
};
use dynrank::graph::{apply_batch, build_graph, BatchUpdate, Graph};
use dynrank::metrics::reference_pagerank;
use dynrank::updates::{generate_random_batch, BatchMode, BatchSpec};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const CHAIN: [(u32, u32); 2] = [(0, 1), (1, 2)];

fn chain_graph() -> Graph {
    build_graph(&CHAIN, 3, true).unwrap()
}

fn threads(cfg: &PageRankConfig, n: usize) -> PageRankConfig {
    PageRankConfig {
        num_threads: n,
        ..cfg.clone()
    }
}

#[test]
fn single_update_step_matches_hand_value() {
    // Chain 0->1->2 with self-loops, uniform ranks: vertex 0 feeds only on
    // its own loop, out-degree 2, so 0.15/3 + 0.85*(1/3)/2.
    let graph = chain_graph();
    let uniform = vec![1.0 / 3.0; 3];
    let expected = 0.05 + 0.85 / 6.0;
    assert!((rank_contribution(&graph, &uniform, 0, 0.85) - expected).abs() < 1e-15);
}

#[test]
fn oracles_agree_with_each_other() {
    for (seed, n) in [(1u64, 20usize), (2, 57), (3, 100)] {
        let edges = random_graph(seed, n, 4.0);
        let iterated = oracle_pagerank(&edges, n, 0.85);
        let solved = solve_pagerank(&edges, n, 0.85);
        assert!(linf(&iterated, &solved) < 1e-12);
    }
}

#[test]
fn reference_matches_direct_solve() {
    let graph = chain_graph();
    let reference = reference_pagerank(&graph, 0.85);
    let solved = solve_pagerank(&CHAIN, 3, 0.85);
    assert!(linf(&reference, &solved) < 1e-12);
}

#[test]
fn static_engines_match_oracle_on_chain() {
    let graph = chain_graph();
    let solved = solve_pagerank(&CHAIN, 3, 0.85);
    let cfg = PageRankConfig::default();
    for threads in [1, 4] {
        let cfg = PageRankConfig {
            num_threads: threads,
            ..cfg.clone()
        };
        for id in [EngineId::StaticBb, EngineId::StaticLf] {
            let report = run_engine(id, &graph, &graph, &BatchUpdate::default(), &[], &cfg).unwrap();
            assert!(report.converged);
            assert!(linf(&report.ranks, &solved) < 1e-9, "{id}");
        }
    }
}

#[test]
fn linf_norm_matches_scalar_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let a: Vec<f64> = (0..1000).map(|_| rng.random_range(-1.0..1.0)).collect();
    let b: Vec<f64> = (0..1000).map(|_| rng.random_range(-1.0..1.0)).collect();
    assert_eq!(linf_norm(&a, &b).unwrap(), linf(&a, &b));
    assert!(linf_norm(&a, &b[..999]).is_err());
}

#[test]
fn naive_dynamic_tracks_single_edge_change() {
    let n = 100;
    let edges = random_graph(7, n, 5.0);
    let prev = build_graph(&edges, n, true).unwrap();
    let prev_ranks = reference_pagerank(&prev, 0.85);
    let batch = BatchUpdate::new(vec![], vec![(3, 95)]);
    let curr = apply_batch(&prev, &batch).unwrap();
    let oracle = oracle_pagerank(&edges_after(&edges, &[], &[(3, 95)]), n, 0.85);
    let cfg = threads(&PageRankConfig::default(), 4);
    for report in [
        nd_bb(&curr, &prev_ranks, &cfg).unwrap(),
        nd_lf(&curr, &prev_ranks, &cfg).unwrap(),
    ] {
        assert!(report.converged);
        assert!(linf(&report.ranks, &oracle) < 1e-9);
    }
}

#[test]
fn frontier_engines_track_single_edge_change() {
    let n = 100;
    let edges = random_graph(8, n, 5.0);
    let prev = build_graph(&edges, n, true).unwrap();
    let prev_ranks = reference_pagerank(&prev, 0.85);
    let batch = BatchUpdate::new(vec![edges[0]], vec![]);
    let curr = apply_batch(&prev, &batch).unwrap();
    let oracle = oracle_pagerank(&edges_after(&edges, &[edges[0]], &[]), n, 0.85);
    let cfg = threads(&PageRankConfig::default(), 4);
    for id in [EngineId::DfBb, EngineId::DfLf, EngineId::DtBb, EngineId::DtLf] {
        let report = run_engine(id, &prev, &curr, &batch, &prev_ranks, &cfg).unwrap();
        assert!(report.converged, "{id}");
        assert!(linf(&report.ranks, &oracle) < 1e-9, "{id}");
        assert!(report.affected_total.unwrap() >= report.affected_initial.unwrap());
    }
}

#[test]
fn every_engine_matches_oracle_across_seeds() {
    let cfg = threads(&PageRankConfig::default(), 4);
    for (seed, n, degree) in [(21u64, 120usize, 3.0), (22, 400, 8.0), (23, 900, 12.0)] {
        let edges = random_graph(seed, n, degree);
        let prev = build_graph(&edges, n, true).unwrap();
        let prev_ranks = reference_pagerank(&prev, 0.85);
        let spec = BatchSpec::new(1e-2, BatchMode::RandomMixed, seed);
        let batch = generate_random_batch(&prev, &spec).unwrap();
        let curr = apply_batch(&prev, &batch).unwrap();
        let oracle = oracle_pagerank(
            &edges_after(&edges, &batch.deletions, &batch.insertions),
            n,
            0.85,
        );
        for id in EngineId::ALL {
            let report = run_engine(id, &prev, &curr, &batch, &prev_ranks, &cfg).unwrap();
            assert!(report.converged, "{id} seed {seed}");
            let err = linf(&report.ranks, &oracle);
            assert!(err < 1e-9, "{id} seed {seed}: {err:e}");
        }
    }
}

#[test]
fn lock_free_runs_stay_accurate_under_schedule_noise() {
    // Same plan repeatedly with 8 workers: interleavings differ per run,
    // results must not.
    let n = 1000;
    let edges = random_graph(31, n, 10.0);
    let prev = build_graph(&edges, n, true).unwrap();
    let cfg = threads(&PageRankConfig::default(), 8);
    let prev_ranks = reference_pagerank(&prev, 0.85);
    let spec = BatchSpec::new(1e-3, BatchMode::RandomMixed, 31);
    let batch = generate_random_batch(&prev, &spec).unwrap();
    let curr = apply_batch(&prev, &batch).unwrap();
    let oracle = oracle_pagerank(
        &edges_after(&edges, &batch.deletions, &batch.insertions),
        n,
        0.85,
    );
    for run in 0..100 {
        let report = run_engine(EngineId::DfLf, &prev, &curr, &batch, &prev_ranks, &cfg).unwrap();
        let err = linf(&report.ranks, &oracle);
        assert!(err < 1e-9, "run {run}: {err:e}");
    }
    for id in [EngineId::StaticLf, EngineId::NdLf, EngineId::DtLf] {
        for run in 0..10 {
            let report = run_engine(id, &prev, &curr, &batch, &prev_ranks, &cfg).unwrap();
            let err = linf(&report.ranks, &oracle);
            assert!(err < 1e-9, "{id} run {run}: {err:e}");
        }
    }
}

#[test]
fn empty_batch_changes_nothing() {
    let n = 200;
    let edges = random_graph(41, n, 6.0);
    let graph = build_graph(&edges, n, true).unwrap();
    let prev_ranks = reference_pagerank(&graph, 0.85);
    let cfg = threads(&PageRankConfig::default(), 4);
    let batch = BatchUpdate::default();
    for id in [EngineId::DtBb, EngineId::DtLf, EngineId::DfBb, EngineId::DfLf] {
        let report = run_engine(id, &graph, &graph, &batch, &prev_ranks, &cfg).unwrap();
        assert_eq!(report.affected_total, Some(0), "{id}");
        assert_eq!(report.ranks, prev_ranks, "{id} must not touch any rank");
    }
}

#[test]
fn ranks_always_sum_to_one() {
    // Self-loops make the transition matrix column-stochastic, so total
    // mass converges to 1 regardless of engine.
    let n = 300;
    let edges = random_graph(51, n, 7.0);
    let graph = build_graph(&edges, n, true).unwrap();
    let cfg = threads(&PageRankConfig::default(), 4);
    for id in [EngineId::StaticBb, EngineId::StaticLf] {
        let report = run_engine(id, &graph, &graph, &BatchUpdate::default(), &[], &cfg).unwrap();
        let total: f64 = report.ranks.iter().sum();
        assert!((total - 1.0).abs() < 1e-7, "{id}: {total}");
    }
}

#[test]
fn wrong_rank_vector_length_is_rejected() {
    let graph = chain_graph();
    let cfg = PageRankConfig::default();
    let short = vec![0.5; 2];
    assert!(nd_bb(&graph, &short, &cfg).is_err());
    assert!(nd_lf(&graph, &short, &cfg).is_err());
}

#[test]
fn static_schedule_makes_barrier_runs_bit_identical() {
    let n = 500;
    let edges = random_graph(61, n, 9.0);
    let prev = build_graph(&edges, n, true).unwrap();
    let cfg = PageRankConfig {
        num_threads: 4,
        static_schedule: true,
        ..PageRankConfig::default()
    };
    let prev_ranks = reference_pagerank(&prev, 0.85);
    let spec = BatchSpec::new(1e-3, BatchMode::RandomMixed, 61);
    let batch = generate_random_batch(&prev, &spec).unwrap();
    let curr = apply_batch(&prev, &batch).unwrap();
    for id in [EngineId::StaticBb, EngineId::NdBb, EngineId::DtBb, EngineId::DfBb] {
        let a = run_engine(id, &prev, &curr, &batch, &prev_ranks, &cfg).unwrap();
        let b = run_engine(id, &prev, &curr, &batch, &prev_ranks, &cfg).unwrap();
        assert_eq!(a.ranks, b.ranks, "{id}");
        assert_eq!(a.iterations, b.iterations, "{id}");
    }
}
