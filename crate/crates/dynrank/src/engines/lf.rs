//! Lock-free engine driver.
//!
//! No barriers anywhere: workers read and write one shared rank vector
//! in place and drift across passes independently, so a vertex's update
//! may consume a mix of old and new neighbor ranks. Convergence is
//! per-vertex: a rank step at or below the iteration tolerance clears the
//! vertex's not_converged bit, a step above the frontier tolerance re-arms
//! the bits of the vertex's out-neighbors (their inputs moved, so earlier
//! clears are stale), and a worker exits once a scan of the vector finds
//! every bit clear. Without the re-arm, a bit cleared on a transiently
//! small step would stay clear while upstream changes were still in
//! flight, and the team could exit with unabsorbed rank mass.
//!
//! Two guards keep long-preempted workers from poisoning the run. Ranks
//! are published by compare-exchange against the value the vertex held
//! when its update began, so a worker that slept through many passes
//! drops its stale result instead of overwriting near-settled ranks
//! (one such re-injection costs dozens of sweeps to re-absorb). And the
//! exit waits for in-flight chunks to land before trusting a clear bit
//! scan, so a stale store that does get through (the cell happened not
//! to move) is always observed, and re-armed bits keep someone working.
//!
//! Marking (dynamic traversal/frontier) splits the batch into chunks for
//! a first pass, then each worker rescans the whole batch, helping to
//! mark any source still unchecked. Checked is a responsibility bit, not
//! a completion proof: traversals own the expansion of vertices they
//! marked first, so a helper blocked at another worker's frontier can
//! check a source whose closure is still unrolling. Compute therefore
//! waits until every worker has left the marking phase; sweeping against
//! a half-marked closure would skip most vertices and spend the bounded
//! pass budget on empty sweeps.
//!
//! A crash-stopped worker abandons its claimed chunk, but each pass has
//! its own claim counter, so survivors re-cover the abandoned vertices in
//! their next pass; the convergence bits only clear once every affected
//! vertex has genuinely settled, whoever computes it.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use crate::engines::bb::InitialMark;
use crate::engines::flags::FlagVectors;
use crate::engines::frontier::{mark_frontier_source, mark_traversal_source};
use crate::engines::hooks::{EngineHooks, EnginePhase};
use crate::engines::pool::WorkPool;
use crate::engines::shared::SharedRanks;
use crate::engines::{inverse_out_degrees, PageRankConfig, RunReport, WorkerSummary};
use crate::graph::{BatchUpdate, Graph};

pub(crate) struct LfRun<'a> {
    pub graph: &'a Graph,
    pub init: &'a [f64],
    pub prev: Option<&'a Graph>,
    pub batch: Option<&'a BatchUpdate>,
    pub mark: Option<InitialMark>,
    pub affected_only: bool,
    pub expand_frontier: bool,
    /// Start with every vertex flagged not-converged (full-sweep engines);
    /// dynamic engines instead flag vertices as they are marked affected.
    pub all_not_converged: bool,
}

pub(crate) fn run<H: EngineHooks>(run: &LfRun, cfg: &PageRankConfig, hooks: &H) -> RunReport {
    cfg.assert_valid();
    let n = run.graph.num_vertices();
    let threads = cfg.num_threads;
    let inv_out = inverse_out_degrees(run.graph);
    let base = (1.0 - cfg.damping) / n as f64;
    let ranks = SharedRanks::from_slice(run.init);
    let flags = if cfg.chunk_convergence {
        FlagVectors::lock_free_with_chunk_cache(n, cfg.chunk_size)
    } else {
        FlagVectors::lock_free(n)
    };
    if run.all_not_converged {
        flags.set_all_not_converged();
    }
    let edges: Vec<(u32, u32)> = run.batch.map(|b| b.edges().collect()).unwrap_or_default();
    let edge_pool = WorkPool::new(edges.len(), cfg.chunk_size, threads, 1, cfg.static_schedule);
    let vertex_pool = WorkPool::new(
        n,
        cfg.chunk_size,
        threads,
        cfg.max_iterations as usize,
        cfg.static_schedule,
    );

    // Workers holding unwritten work: a claimed-but-unfinished compute chunk,
    // or an unfinished marking phase. Exit requires this to be zero first,
    // then an all-clear bit scan: a peer preempted mid-chunk may still carry
    // a rank computed from long-stale inputs, and its deferred store (plus
    // the re-arm it triggers) must land before anyone trusts the scan.
    // Simulated crashes fire only at claim boundaries, so a crash never
    // strands the counter.
    let in_flight = AtomicUsize::new(0);
    // Workers still inside the marking phase. Compute waits for this to
    // drain: traversal ownership means a helper's blocked rescan can
    // certify a source as checked while the owning worker's DFS is still
    // unrolling, and a worker that starts sweeping against the half-marked
    // closure skips almost every vertex, burning pass budget at no benefit
    // (the budget is a sweep count; a sweep that cannot see the work is
    // not a sweep). Markers never hold this across a crash stop.
    let marking = AtomicUsize::new(0);

    let started = Instant::now();
    let summaries: Vec<WorkerSummary> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..threads)
            .map(|w| {
                let (flags, edges, inv_out, ranks) = (&flags, &edges, &inv_out, &ranks);
                let (edge_pool, vertex_pool) = (&edge_pool, &vertex_pool);
                let (in_flight, marking) = (&in_flight, &marking);
                scope.spawn(move || {
                    let mut summary = WorkerSummary::default();
                    let mark_source = |kind: InitialMark, u: u32| match kind {
                        InitialMark::FrontierNeighbors => {
                            mark_frontier_source(run.prev.unwrap(), run.graph, flags, u)
                        }
                        InitialMark::TraversalClosure => {
                            mark_traversal_source(run.prev.unwrap(), run.graph, flags, u)
                        }
                    };

                    if let Some(kind) = run.mark {
                        hooks.on_phase(w, EnginePhase::MarkInitial);
                        in_flight.fetch_add(1, Ordering::AcqRel);
                        marking.fetch_add(1, Ordering::AcqRel);
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
                                marking.fetch_sub(1, Ordering::AcqRel);
                                in_flight.fetch_sub(1, Ordering::AcqRel);
                                return summary;
                            }
                            let Some(range) = chunk else { break };
                            for i in range {
                                let u = edges[i].0;
                                if !flags.is_checked(u) {
                                    summary.initial_marks += mark_source(kind, u);
                                    flags.set_checked(u);
                                }
                            }
                        }
                        // Keep rescanning, helping to mark whatever is still
                        // unchecked (another claimant may have crashed or be
                        // stalled), until one clean sweep sees every source
                        // checked. Duplicate marking is idempotent.
                        loop {
                            let mut all_checked = true;
                            for &(u, _) in edges {
                                if !flags.is_checked(u) {
                                    all_checked = false;
                                    summary.initial_marks += mark_source(kind, u);
                                    flags.set_checked(u);
                                }
                            }
                            if all_checked {
                                break;
                            }
                        }
                        marking.fetch_sub(1, Ordering::AcqRel);
                        in_flight.fetch_sub(1, Ordering::AcqRel);
                        // Sweep only against the complete closure; see the
                        // counter's comment.
                        while marking.load(Ordering::Acquire) != 0 {
                            std::thread::yield_now();
                        }
                    }

                    hooks.on_phase(w, EnginePhase::Compute);
                    for pass in 0..cfg.max_iterations as usize {
                        let mut claims = vertex_pool.claims(pass, w);
                        loop {
                            let chunk = claims.next();
                            let go = hooks.on_chunk_claim(
                                w,
                                EnginePhase::Compute,
                                pass,
                                claims.last_attempt(),
                            );
                            if !go {
                                summary.crashed = true;
                                return summary;
                            }
                            let Some(range) = chunk else { break };
                            in_flight.fetch_add(1, Ordering::AcqRel);
                            for v in range {
                                let vid = v as u32;
                                if run.affected_only && !flags.is_affected(vid) {
                                    continue;
                                }
                                let before = ranks.get(v);
                                let mut r = base;
                                for &u in run.graph.in_neighbors(vid) {
                                    r += cfg.damping * ranks.get(u as usize) * inv_out[u as usize];
                                }
                                // Publish only if the cell still holds what it
                                // held when the sum started. A worker parked
                                // mid-chunk for many passes would otherwise
                                // wake and overwrite near-settled ranks with a
                                // result from long-stale inputs; absorbing one
                                // such re-injection costs dozens of sweeps,
                                // and a few of them exhaust the iteration
                                // budget. The failed case drops the update:
                                // a fresher write already landed and its bit
                                // transitions stand, while this vertex gets
                                // recomputed on the next sweep anyway.
                                if !ranks.try_replace(v, before, r) {
                                    hooks.on_vertex(w, vid);
                                    continue;
                                }
                                let dr = (r - before).abs();
                                if dr > cfg.frontier_tolerance {
                                    // The out-neighbors' inputs just moved, so
                                    // re-arm their convergence bits: a bit
                                    // cleared on an earlier small step must not
                                    // let the team exit before this change has
                                    // been absorbed downstream. Frontier engines
                                    // mark instead, which re-arms as a side
                                    // effect and also grows the affected set.
                                    if run.expand_frontier {
                                        for &nv in run.graph.out(vid) {
                                            if flags.mark_affected(nv) {
                                                summary.expansion_marks += 1;
                                            }
                                        }
                                    } else {
                                        for &nv in run.graph.out(vid) {
                                            flags.rearm_not_converged(nv);
                                        }
                                    }
                                }
                                if dr <= cfg.iteration_tolerance {
                                    if flags.is_not_converged(vid) {
                                        flags.clear_not_converged(vid);
                                    }
                                } else {
                                    // Still moving: make sure our own bit is
                                    // set even if a peer cleared it from a
                                    // stale snapshot of this vertex.
                                    flags.rearm_not_converged(vid);
                                }
                                hooks.on_vertex(w, vid);
                            }
                            in_flight.fetch_sub(1, Ordering::AcqRel);
                        }
                        summary.iterations = pass as u32 + 1;
                        if flags.all_converged() {
                            // Wait for holders to land instead of claiming
                            // more work: claiming would keep peers observing
                            // nonzero in-flight counts forever (someone is
                            // always mid-chunk), while waiting drains the
                            // count because peers whose own scans come up
                            // clear wait here too.
                            while in_flight.load(Ordering::Acquire) != 0 {
                                std::thread::yield_now();
                            }
                            // Authoritative re-scan, ordered after the zero
                            // read: a landed holder's stale store and the
                            // re-arm it triggered are visible now, so a clear
                            // result means genuinely settled ranks.
                            if flags.all_converged() {
                                summary.converged = true;
                                break;
                            }
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
    // Authoritative final verdict, after all workers stopped.
    let converged = flags.all_converged();
    let (affected_initial, affected_total, affected) = if run.mark.is_some() {
        let initial: usize = summaries.iter().map(|s| s.initial_marks).sum();
        let expanded: usize = summaries.iter().map(|s| s.expansion_marks).sum();
        (
            Some(initial),
            Some(initial + expanded),
            Some(flags.affected_vertices()),
        )
    } else {
        (None, None, None)
    };
    RunReport {
        ranks: ranks.to_vec(),
        iterations,
        wall_time,
        affected_initial,
        affected_total,
        affected,
        converged,
        faults: None,
    }
}
