//! Fault injection end to end: realized crash counts, accuracy under
//! faults, and delay accounting.

mod common;

use common::{edges_after, linf, oracle_pagerank, random_graph};
use dynrank::engines::{EngineId, PageRankConfig};
use dynrank::faults::{run_with_faults, FaultPlan};
use dynrank::graph::{apply_batch, build_graph, BatchUpdate};
use dynrank::metrics::reference_pagerank;
use dynrank::updates::{generate_random_batch, BatchMode, BatchSpec};

fn cfg_with(threads: usize) -> PageRankConfig {
    PageRankConfig {
        num_threads: threads,
        ..PageRankConfig::default()
    }
}

#[test]
fn realized_crash_count_matches_the_plan() {
    // A worker can finish before its trigger pass (single-core schedules
    // serialize workers); the injector must still stop exactly the planned
    // number of workers.
    let edges: Vec<(u32, u32)> = (0..5u32).map(|v| (v, (v + 1) % 5)).collect();
    let graph = build_graph(&edges, 5, true).unwrap();
    let cfg = cfg_with(4);
    let prev_ranks = vec![0.3, 0.1, 0.2, 0.25, 0.15];
    for crash_count in [0usize, 1, 2, 3] {
        let plan = FaultPlan {
            crash_count,
            ..FaultPlan::default()
        };
        let report = run_with_faults(
            EngineId::NdLf,
            &graph,
            &graph,
            &BatchUpdate::default(),
            &prev_ranks,
            &cfg,
            &plan,
        )
        .unwrap();
        let faults = report.faults.as_ref().unwrap();
        assert_eq!(faults.crashes.len(), crash_count);
        assert!(report.converged);
    }
}

#[test]
fn lock_free_engines_survive_heavy_crashes() {
    // 7 of 8 workers stop and the lone survivor still lands on the oracle.
    let n = 400;
    let edges = random_graph(71, n, 6.0);
    let prev = build_graph(&edges, n, true).unwrap();
    let prev_ranks = reference_pagerank(&prev, 0.85);
    let spec = BatchSpec::new(1e-2, BatchMode::RandomMixed, 71);
    let batch = generate_random_batch(&prev, &spec).unwrap();
    let curr = apply_batch(&prev, &batch).unwrap();
    let oracle = oracle_pagerank(
        &edges_after(&edges, &batch.deletions, &batch.insertions),
        n,
        0.85,
    );
    let cfg = cfg_with(8);
    for id in [EngineId::StaticLf, EngineId::NdLf, EngineId::DtLf, EngineId::DfLf] {
        for seed in 0..5u64 {
            let plan = FaultPlan {
                crash_count: 7,
                rng_seed: seed,
                ..FaultPlan::default()
            };
            let report =
                run_with_faults(id, &prev, &curr, &batch, &prev_ranks, &cfg, &plan).unwrap();
            assert!(report.converged, "{id} seed {seed}");
            assert_eq!(report.faults.as_ref().unwrap().crashes.len(), 7);
            let err = linf(&report.ranks, &oracle);
            assert!(err < 1e-9, "{id} seed {seed}: {err:e}");
        }
    }
}

#[test]
fn crash_schedules_replay_identically() {
    let n = 300;
    let edges = random_graph(73, n, 5.0);
    let graph = build_graph(&edges, n, true).unwrap();
    let prev_ranks = reference_pagerank(&graph, 0.85);
    let cfg = cfg_with(6);
    let plan = FaultPlan {
        crash_count: 3,
        rng_seed: 5,
        ..FaultPlan::default()
    };
    let run = || {
        run_with_faults(
            EngineId::NdLf,
            &graph,
            &graph,
            &BatchUpdate::default(),
            &prev_ranks,
            &cfg,
            &plan,
        )
        .unwrap()
        .faults
        .unwrap()
        .crashes
    };
    assert_eq!(run(), run());
}

#[test]
fn virtual_clock_charges_every_delay() {
    let n = 200;
    let edges = random_graph(79, n, 5.0);
    let graph = build_graph(&edges, n, true).unwrap();
    let cfg = cfg_with(4);
    let plan = FaultPlan {
        delay_probability: 0.01,
        delay_duration_ms: 50,
        virtual_clock: true,
        ..FaultPlan::default()
    };
    let report = run_with_faults(
        EngineId::StaticLf,
        &graph,
        &graph,
        &BatchUpdate::default(),
        &[],
        &cfg,
        &plan,
    )
    .unwrap();
    let faults = report.faults.unwrap();
    assert!(faults.delay_events > 0);
    assert_eq!(
        faults.virtual_delay_nanos,
        faults.delay_events * 50 * 1_000_000
    );
    assert!(report.converged);
}

#[test]
fn certain_delay_fires_on_every_vertex_computation() {
    let edges: Vec<(u32, u32)> = (0..10u32).map(|v| (v, (v + 1) % 10)).collect();
    let graph = build_graph(&edges, 10, true).unwrap();
    let cfg = cfg_with(2);
    let plan = FaultPlan {
        delay_probability: 1.0,
        delay_duration_ms: 1,
        virtual_clock: true,
        ..FaultPlan::default()
    };
    let report = run_with_faults(
        EngineId::StaticBb,
        &graph,
        &graph,
        &BatchUpdate::default(),
        &[],
        &cfg,
        &plan,
    )
    .unwrap();
    let faults = report.faults.unwrap();
    assert_eq!(faults.delay_events, faults.vertex_events);
}

#[test]
fn plans_without_a_survivor_are_rejected() {
    let graph = build_graph(&[(0, 1)], 2, true).unwrap();
    let cfg = cfg_with(4);
    let plan = FaultPlan {
        crash_count: 4,
        ..FaultPlan::default()
    };
    assert!(run_with_faults(
        EngineId::NdLf,
        &graph,
        &graph,
        &BatchUpdate::default(),
        &[0.5, 0.5],
        &cfg,
        &plan,
    )
    .is_err());
}
