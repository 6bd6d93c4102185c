//! Barrier-based engine driver.
//!
//! Classic parallel Jacobi shape: every iteration, workers claim chunks of
//! the vertex range, compute new ranks into the write buffer from the read
//! buffer, then meet at a barrier to agree on the iteration's L-inf change
//! and swap buffer roles. Because unprocessed vertices hold identical
//! values in both buffers, the max of the workers' local chunk deltas IS
//! the full-vector norm; no second reduction sweep is needed.
//!
//! The computed value set, the convergence decision, and the iteration
//! count depend only on buffer contents at barrier crossings, never on
//! which worker computed what, so results are identical for any schedule
//! and thread count. Frontier expansion preserves this by marking
//! out-neighbors PENDING during an iteration and promoting them to ACTIVE
//! between the barriers: the set processed in iteration k+1 is fixed by
//! iteration k's values alone.
//!
//! A crash-stopped worker exits before its next barrier, so the surviving
//! team blocks forever: barrier-based runs do not tolerate worker loss.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Barrier;
use std::time::Instant;

use crate::engines::flags::FlagVectors;
use crate::engines::frontier::{mark_frontier_source, mark_traversal_source};
use crate::engines::hooks::{EngineHooks, EnginePhase};
use crate::engines::pool::WorkPool;
use crate::engines::shared::SharedRanks;
use crate::engines::{inverse_out_degrees, PageRankConfig, RunReport, WorkerSummary};
use crate::graph::{BatchUpdate, Graph};

/// How the initially affected set is marked.
#[derive(Clone, Copy, Debug)]
pub(crate) enum InitialMark {
    /// Union out-neighborhoods of batch sources (dynamic frontier).
    FrontierNeighbors,
    /// DFS closure over the current snapshot from those neighborhoods
    /// (dynamic traversal).
    TraversalClosure,
}

pub(crate) struct BbRun<'a> {
    pub graph: &'a Graph,
    pub init: &'a [f64],
    pub prev: Option<&'a Graph>,
    pub batch: Option<&'a BatchUpdate>,
    pub mark: Option<InitialMark>,
    pub affected_only: bool,
    pub expand_frontier: bool,
}

pub(crate) fn run<H: EngineHooks>(run: &BbRun, cfg: &PageRankConfig, hooks: &H) -> RunReport {
    cfg.assert_valid();
    let n = run.graph.num_vertices();
    let threads = cfg.num_threads;
    let inv_out = inverse_out_degrees(run.graph);
    let base = (1.0 - cfg.damping) / n as f64;
    let buffers = [
        SharedRanks::from_slice(run.init),
        SharedRanks::from_slice(run.init),
    ];
    let flags = run.mark.map(|_| FlagVectors::barrier_based(n));
    let edges: Vec<(u32, u32)> = run.batch.map(|b| b.edges().collect()).unwrap_or_default();
    let edge_pool = WorkPool::new(edges.len(), cfg.chunk_size, threads, 1, cfg.static_schedule);
    let vertex_pool = WorkPool::new(
        n,
        cfg.chunk_size,
        threads,
        cfg.max_iterations as usize,
        cfg.static_schedule,
    );
    let delta_slots: Vec<AtomicU64> = (0..threads).map(|_| AtomicU64::new(0)).collect();
    let barrier = Barrier::new(threads);
    // Static partition used for promoting pending marks between barriers.
    let promo_len = n.div_ceil(threads);

    let started = Instant::now();
    let summaries: Vec<WorkerSummary> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..threads)
            .map(|w| {
                let (flags, edges, inv_out) = (&flags, &edges, &inv_out);
                let (buffers, delta_slots, barrier) = (&buffers, &delta_slots, &barrier);
                let (edge_pool, vertex_pool) = (&edge_pool, &vertex_pool);
                scope.spawn(move || {
                    let mut summary = WorkerSummary::default();

                    if let Some(kind) = run.mark {
                        let flags = flags.as_ref().unwrap();
                        let prev = run.prev.expect("marking requires the previous snapshot");
                        hooks.on_phase(w, EnginePhase::MarkInitial);
                        let mut claims = edge_pool.claims(0, w);
                        loop {
                            let chunk = claims.next();
                            let go = hooks.on_chunk_claim(
                                w,
                                EnginePhase::MarkInitial,
                                0,
                                claims.last_attempt(),
                            );
                            if !go {
                                summary.crashed = true;
                                return summary;
                            }
                            let Some(range) = chunk else { break };
                            for i in range {
                                let u = edges[i].0;
                                summary.initial_marks += match kind {
                                    InitialMark::FrontierNeighbors => {
                                        mark_frontier_source(prev, run.graph, flags, u)
                                    }
                                    InitialMark::TraversalClosure => {
                                        mark_traversal_source(prev, run.graph, flags, u)
                                    }
                                };
                            }
                        }
                        barrier.wait();
                    }

                    hooks.on_phase(w, EnginePhase::Compute);
                    for iter in 0..cfg.max_iterations as usize {
                        let (read, write) = if iter % 2 == 0 {
                            (&buffers[0], &buffers[1])
                        } else {
                            (&buffers[1], &buffers[0])
                        };
                        let mut local_max = 0.0f64;
                        let mut claims = vertex_pool.claims(iter, w);
                        loop {
                            let chunk = claims.next();
                            let go = hooks.on_chunk_claim(
                                w,
                                EnginePhase::Compute,
                                iter,
                                claims.last_attempt(),
                            );
                            if !go {
                                summary.crashed = true;
                                return summary;
                            }
                            let Some(range) = chunk else { break };
                            for v in range {
                                if run.affected_only
                                    && !flags.as_ref().unwrap().is_active(v as u32)
                                {
                                    continue;
                                }
                                let mut r = base;
                                for &u in run.graph.in_neighbors(v as u32) {
                                    r += cfg.damping * read.get(u as usize) * inv_out[u as usize];
                                }
                                let dr = (r - read.get(v)).abs();
                                write.set(v, r);
                                if dr > local_max {
                                    local_max = dr;
                                }
                                if run.expand_frontier && dr > cfg.frontier_tolerance {
                                    let flags = flags.as_ref().unwrap();
                                    for &nv in run.graph.out(v as u32) {
                                        if flags.mark_affected_pending(nv) {
                                            summary.expansion_marks += 1;
                                        }
                                    }
                                }
                                hooks.on_vertex(w, v as u32);
                            }
                        }
                        delta_slots[w].store(local_max.to_bits(), Ordering::Relaxed);
                        barrier.wait();
                        // Exact f64 max over the same slots: every worker
                        // reaches the same delta and takes the same branch.
                        let delta = delta_slots
                            .iter()
                            .fold(0.0f64, |acc, s| acc.max(f64::from_bits(s.load(Ordering::Relaxed))));
                        let converged = delta <= cfg.iteration_tolerance;
                        if run.expand_frontier && !converged {
                            let start = (w * promo_len).min(n);
                            let end = (start + promo_len).min(n);
                            flags.as_ref().unwrap().promote_pending(start..end);
                        }
                        barrier.wait();
                        summary.iterations = iter as u32 + 1;
                        if converged {
                            summary.converged = true;
                            break;
                        }
                    }
                    hooks.on_worker_exit(w, summary.iterations as usize);
                    summary
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("engine worker panicked"))
            .collect()
    });
    let wall_time = started.elapsed().as_secs_f64();

    let iterations = summaries.iter().map(|s| s.iterations).max().unwrap_or(0);
    let converged = summaries.iter().any(|s| s.converged);
    // Iteration k writes buffers[(k + 1) % 2], so after `iterations` passes
    // the freshest buffer is buffers[iterations % 2].
    let ranks = buffers[iterations as usize % 2].to_vec();
    let (affected_initial, affected_total, affected) = match &flags {
        Some(f) => {
            let initial: usize = summaries.iter().map(|s| s.initial_marks).sum();
            let expanded: usize = summaries.iter().map(|s| s.expansion_marks).sum();
            (
                Some(initial),
                Some(initial + expanded),
                Some(f.affected_vertices()),
            )
        }
        None => (None, None, None),
    };
    RunReport {
        ranks,
        iterations,
        wall_time,
        affected_initial,
        affected_total,
        affected,
        converged,
        faults: None,
    }
}
