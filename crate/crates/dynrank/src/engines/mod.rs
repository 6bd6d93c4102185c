//! PageRank engines: barrier-based and lock-free variants of static,
//! naive-dynamic, dynamic traversal, and dynamic frontier ranking.
//!
//! All engines compute, for damping factor d over n vertices,
//!
//! ```text
//! R[v] = (1 - d)/n + d * sum over in-neighbors u of R[u] / out_degree(u)
//! ```
//!
//! iterated until the L-inf step change drops to the iteration tolerance
//! (barrier-based, with a synchronized per-iteration norm) or until every
//! per-vertex convergence bit clears (lock-free, no barriers at all).
//! Graphs carry a self-loop on every vertex, so out-degrees are never zero
//! and no dangling-mass correction appears in the update rule.

mod bb;
pub(crate) mod flags;
mod frontier;
pub(crate) mod hooks;
mod lf;
pub(crate) mod pool;
mod shared;

pub use flags::{FlagVectors, AFFECTED_ACTIVE, AFFECTED_CLEAR, AFFECTED_PENDING};
pub use frontier::{mark_initial_affected_df, visit_dfs};
pub use hooks::{EngineHooks, EnginePhase, NoHooks};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::faults::FaultReport;
use crate::graph::{BatchUpdate, Graph};

/// A rank score per vertex, indexed by vertex id.
pub type RankVector = Vec<f64>;

/// Engine tuning parameters.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct PageRankConfig {
    /// Damping factor d in (0, 1).
    pub damping: f64,
    /// Convergence threshold on the L-inf rank change per iteration.
    pub iteration_tolerance: f64,
    /// Frontier expansion threshold: a rank change above this marks the
    /// vertex's out-neighbors affected.
    pub frontier_tolerance: f64,
    pub max_iterations: u32,
    /// Vertices (or batch edges, while marking) per work chunk.
    pub chunk_size: usize,
    pub num_threads: usize,
    /// Pin each chunk to a fixed worker instead of first-come claiming.
    /// Makes barrier-based runs bit-identical across repetitions.
    pub static_schedule: bool,
    /// Cache per-chunk convergence in the lock-free termination scan.
    pub chunk_convergence: bool,
}

impl Default for PageRankConfig {
    fn default() -> Self {
        Self {
            damping: 0.85,
            iteration_tolerance: 1e-10,
            frontier_tolerance: 1e-13,
            max_iterations: 500,
            chunk_size: 2048,
            num_threads: std::thread::available_parallelism().map_or(1, |p| p.get()),
            static_schedule: false,
            chunk_convergence: false,
        }
    }
}

impl PageRankConfig {
    /// Panics with a field-by-field message on out-of-range values; engines
    /// call this on entry so misconfiguration fails loudly, not numerically.
    pub fn assert_valid(&self) {
        assert!(
            self.damping > 0.0 && self.damping < 1.0,
            "damping must be in (0, 1), got {}",
            self.damping
        );
        assert!(
            self.iteration_tolerance > 0.0,
            "iteration_tolerance must be positive, got {}",
            self.iteration_tolerance
        );
        assert!(
            self.frontier_tolerance > 0.0,
            "frontier_tolerance must be positive, got {}",
            self.frontier_tolerance
        );
        assert!(self.max_iterations >= 1, "max_iterations must be at least 1");
        assert!(self.chunk_size >= 1, "chunk_size must be at least 1");
        assert!(self.num_threads >= 1, "num_threads must be at least 1");
    }
}

/// Outcome of one engine run.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub ranks: RankVector,
    /// Iteration passes executed. For lock-free engines this is the largest
    /// pass count any worker reached (workers drift across passes).
    pub iterations: u32,
    /// Seconds spent marking and iterating, buffer setup excluded.
    pub wall_time: f64,
    /// Vertices marked affected before the first iteration (dynamic
    /// traversal / frontier engines only).
    pub affected_initial: Option<usize>,
    /// Cumulative affected set size, frontier expansion included.
    pub affected_total: Option<usize>,
    /// Sorted ids of the cumulative affected set.
    pub affected: Option<Vec<u32>>,
    /// Whether the run met the tolerance before `max_iterations`.
    pub converged: bool,
    /// Present when the run executed under fault injection.
    pub faults: Option<FaultReport>,
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("previous rank vector has length {actual}, expected {expected} (one per vertex)")]
    RankLengthMismatch { expected: usize, actual: usize },
    #[error("vector lengths differ ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
}

/// One term-by-term application of the rank update rule to vertex `v`.
pub fn rank_contribution(graph: &Graph, ranks: &[f64], v: u32, damping: f64) -> f64 {
    let n = graph.num_vertices() as f64;
    let mut r = (1.0 - damping) / n;
    for &u in graph.in_neighbors(v) {
        r += damping * ranks[u as usize] / graph.out_degree(u) as f64;
    }
    r
}

/// L-inf distance between two rank vectors.
pub fn linf_norm(a: &[f64], b: &[f64]) -> Result<f64, EngineError> {
    if a.len() != b.len() {
        return Err(EngineError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.iter()
        .zip(b)
        .fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs())))
}

/// The eight engine variants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EngineId {
    StaticBb,
    StaticLf,
    NdBb,
    NdLf,
    DtBb,
    DtLf,
    DfBb,
    DfLf,
}

impl EngineId {
    pub const ALL: [EngineId; 8] = [
        EngineId::StaticBb,
        EngineId::StaticLf,
        EngineId::NdBb,
        EngineId::NdLf,
        EngineId::DtBb,
        EngineId::DtLf,
        EngineId::DfBb,
        EngineId::DfLf,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EngineId::StaticBb => "static-bb",
            EngineId::StaticLf => "static-lf",
            EngineId::NdBb => "nd-bb",
            EngineId::NdLf => "nd-lf",
            EngineId::DtBb => "dt-bb",
            EngineId::DtLf => "dt-lf",
            EngineId::DfBb => "df-bb",
            EngineId::DfLf => "df-lf",
        }
    }

    pub fn is_lock_free(self) -> bool {
        matches!(
            self,
            EngineId::StaticLf | EngineId::NdLf | EngineId::DtLf | EngineId::DfLf
        )
    }

    pub fn is_barrier_based(self) -> bool {
        !self.is_lock_free()
    }

    /// Engines that consume a previous snapshot plus a batch (as opposed to
    /// ranking the current snapshot from scratch or from previous ranks).
    pub fn uses_batch(self) -> bool {
        matches!(
            self,
            EngineId::DtBb | EngineId::DtLf | EngineId::DfBb | EngineId::DfLf
        )
    }

    /// The static engine of the same synchronization flavor, used to produce
    /// baseline ranks a dynamic run starts from.
    pub fn static_counterpart(self) -> EngineId {
        if self.is_lock_free() {
            EngineId::StaticLf
        } else {
            EngineId::StaticBb
        }
    }
}

impl std::str::FromStr for EngineId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EngineId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| {
                let valid: Vec<&str> = EngineId::ALL.iter().map(|id| id.as_str()).collect();
                format!("unknown engine id '{s}'; valid ids: {}", valid.join(", "))
            })
    }
}

impl std::fmt::Display for EngineId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

fn uniform_ranks(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

fn check_prev_ranks(graph: &Graph, prev_ranks: &[f64]) -> Result<(), EngineError> {
    if prev_ranks.len() != graph.num_vertices() {
        return Err(EngineError::RankLengthMismatch {
            expected: graph.num_vertices(),
            actual: prev_ranks.len(),
        });
    }
    Ok(())
}

/// Static barrier-based PageRank from a uniform start.
pub fn static_bb(graph: &Graph, cfg: &PageRankConfig) -> RunReport {
    static_bb_with_hooks(graph, cfg, &NoHooks)
}

pub fn static_bb_with_hooks<H: EngineHooks>(
    graph: &Graph,
    cfg: &PageRankConfig,
    hooks: &H,
) -> RunReport {
    let init = uniform_ranks(graph.num_vertices());
    bb::run(
        &bb::BbRun {
            graph,
            init: &init,
            prev: None,
            batch: None,
            mark: None,
            affected_only: false,
            expand_frontier: false,
        },
        cfg,
        hooks,
    )
}

/// Static lock-free PageRank from a uniform start.
pub fn static_lf(graph: &Graph, cfg: &PageRankConfig) -> RunReport {
    static_lf_with_hooks(graph, cfg, &NoHooks)
}

pub fn static_lf_with_hooks<H: EngineHooks>(
    graph: &Graph,
    cfg: &PageRankConfig,
    hooks: &H,
) -> RunReport {
    let init = uniform_ranks(graph.num_vertices());
    lf::run(
        &lf::LfRun {
            graph,
            init: &init,
            prev: None,
            batch: None,
            mark: None,
            affected_only: false,
            expand_frontier: false,
            all_not_converged: true,
        },
        cfg,
        hooks,
    )
}

/// Naive-dynamic barrier-based: rank the current snapshot starting from the
/// previous snapshot's ranks, processing every vertex.
pub fn nd_bb(
    graph: &Graph,
    prev_ranks: &[f64],
    cfg: &PageRankConfig,
) -> Result<RunReport, EngineError> {
    nd_bb_with_hooks(graph, prev_ranks, cfg, &NoHooks)
}

pub fn nd_bb_with_hooks<H: EngineHooks>(
    graph: &Graph,
    prev_ranks: &[f64],
    cfg: &PageRankConfig,
    hooks: &H,
) -> Result<RunReport, EngineError> {
    check_prev_ranks(graph, prev_ranks)?;
    Ok(bb::run(
        &bb::BbRun {
            graph,
            init: prev_ranks,
            prev: None,
            batch: None,
            mark: None,
            affected_only: false,
            expand_frontier: false,
        },
        cfg,
        hooks,
    ))
}

/// Naive-dynamic lock-free.
pub fn nd_lf(
    graph: &Graph,
    prev_ranks: &[f64],
    cfg: &PageRankConfig,
) -> Result<RunReport, EngineError> {
    nd_lf_with_hooks(graph, prev_ranks, cfg, &NoHooks)
}

pub fn nd_lf_with_hooks<H: EngineHooks>(
    graph: &Graph,
    prev_ranks: &[f64],
    cfg: &PageRankConfig,
    hooks: &H,
) -> Result<RunReport, EngineError> {
    check_prev_ranks(graph, prev_ranks)?;
    Ok(lf::run(
        &lf::LfRun {
            graph,
            init: prev_ranks,
            prev: None,
            batch: None,
            mark: None,
            affected_only: false,
            expand_frontier: false,
            all_not_converged: true,
        },
        cfg,
        hooks,
    ))
}

/// Dynamic traversal, barrier-based: mark the DFS closure of the batch's
/// union out-neighborhoods, then iterate over marked vertices only.
pub fn dt_bb(
    prev: &Graph,
    curr: &Graph,
    batch: &BatchUpdate,
    prev_ranks: &[f64],
    cfg: &PageRankConfig,
) -> Result<RunReport, EngineError> {
    dt_bb_with_hooks(prev, curr, batch, prev_ranks, cfg, &NoHooks)
}

pub fn dt_bb_with_hooks<H: EngineHooks>(
    prev: &Graph,
    curr: &Graph,
    batch: &BatchUpdate,
    prev_ranks: &[f64],
    cfg: &PageRankConfig,
    hooks: &H,
) -> Result<RunReport, EngineError> {
    check_prev_ranks(curr, prev_ranks)?;
    Ok(bb::run(
        &bb::BbRun {
            graph: curr,
            init: prev_ranks,
            prev: Some(prev),
            batch: Some(batch),
            mark: Some(bb::InitialMark::TraversalClosure),
            affected_only: true,
            expand_frontier: false,
        },
        cfg,
        hooks,
    ))
}

/// Dynamic traversal, lock-free.
pub fn dt_lf(
    prev: &Graph,
    curr: &Graph,
    batch: &BatchUpdate,
    prev_ranks: &[f64],
    cfg: &PageRankConfig,
) -> Result<RunReport, EngineError> {
    dt_lf_with_hooks(prev, curr, batch, prev_ranks, cfg, &NoHooks)
}

pub fn dt_lf_with_hooks<H: EngineHooks>(
    prev: &Graph,
    curr: &Graph,
    batch: &BatchUpdate,
    prev_ranks: &[f64],
    cfg: &PageRankConfig,
    hooks: &H,
) -> Result<RunReport, EngineError> {
    check_prev_ranks(curr, prev_ranks)?;
    Ok(lf::run(
        &lf::LfRun {
            graph: curr,
            init: prev_ranks,
            prev: Some(prev),
            batch: Some(batch),
            mark: Some(bb::InitialMark::TraversalClosure),
            affected_only: true,
            expand_frontier: false,
            all_not_converged: false,
        },
        cfg,
        hooks,
    ))
}

/// Dynamic frontier, barrier-based: mark union out-neighborhoods of batch
/// sources, then iterate over marked vertices, expanding the frontier
/// wherever a rank moves by more than the frontier tolerance.
pub fn df_bb(
    prev: &Graph,
    curr: &Graph,
    batch: &BatchUpdate,
    prev_ranks: &[f64],
    cfg: &PageRankConfig,
) -> Result<RunReport, EngineError> {
    df_bb_with_hooks(prev, curr, batch, prev_ranks, cfg, &NoHooks)
}

pub fn df_bb_with_hooks<H: EngineHooks>(
    prev: &Graph,
    curr: &Graph,
    batch: &BatchUpdate,
    prev_ranks: &[f64],
    cfg: &PageRankConfig,
    hooks: &H,
) -> Result<RunReport, EngineError> {
    check_prev_ranks(curr, prev_ranks)?;
    Ok(bb::run(
        &bb::BbRun {
            graph: curr,
            init: prev_ranks,
            prev: Some(prev),
            batch: Some(batch),
            mark: Some(bb::InitialMark::FrontierNeighbors),
            affected_only: true,
            expand_frontier: true,
        },
        cfg,
        hooks,
    ))
}

/// Dynamic frontier, lock-free.
pub fn df_lf(
    prev: &Graph,
    curr: &Graph,
    batch: &BatchUpdate,
    prev_ranks: &[f64],
    cfg: &PageRankConfig,
) -> Result<RunReport, EngineError> {
    df_lf_with_hooks(prev, curr, batch, prev_ranks, cfg, &NoHooks)
}

pub fn df_lf_with_hooks<H: EngineHooks>(
    prev: &Graph,
    curr: &Graph,
    batch: &BatchUpdate,
    prev_ranks: &[f64],
    cfg: &PageRankConfig,
    hooks: &H,
) -> Result<RunReport, EngineError> {
    check_prev_ranks(curr, prev_ranks)?;
    Ok(lf::run(
        &lf::LfRun {
            graph: curr,
            init: prev_ranks,
            prev: Some(prev),
            batch: Some(batch),
            mark: Some(bb::InitialMark::FrontierNeighbors),
            affected_only: true,
            expand_frontier: true,
            all_not_converged: false,
        },
        cfg,
        hooks,
    ))
}

/// Runs any engine by id. Static engines rank `curr` and ignore the other
/// dynamic inputs.
pub fn run_engine(
    id: EngineId,
    prev: &Graph,
    curr: &Graph,
    batch: &BatchUpdate,
    prev_ranks: &[f64],
    cfg: &PageRankConfig,
) -> Result<RunReport, EngineError> {
    run_engine_with_hooks(id, prev, curr, batch, prev_ranks, cfg, &NoHooks)
}

pub fn run_engine_with_hooks<H: EngineHooks>(
    id: EngineId,
    prev: &Graph,
    curr: &Graph,
    batch: &BatchUpdate,
    prev_ranks: &[f64],
    cfg: &PageRankConfig,
    hooks: &H,
) -> Result<RunReport, EngineError> {
    match id {
        EngineId::StaticBb => Ok(static_bb_with_hooks(curr, cfg, hooks)),
        EngineId::StaticLf => Ok(static_lf_with_hooks(curr, cfg, hooks)),
        EngineId::NdBb => nd_bb_with_hooks(curr, prev_ranks, cfg, hooks),
        EngineId::NdLf => nd_lf_with_hooks(curr, prev_ranks, cfg, hooks),
        EngineId::DtBb => dt_bb_with_hooks(prev, curr, batch, prev_ranks, cfg, hooks),
        EngineId::DtLf => dt_lf_with_hooks(prev, curr, batch, prev_ranks, cfg, hooks),
        EngineId::DfBb => df_bb_with_hooks(prev, curr, batch, prev_ranks, cfg, hooks),
        EngineId::DfLf => df_lf_with_hooks(prev, curr, batch, prev_ranks, cfg, hooks),
    }
}

/// Worker-local run accounting, merged by the drivers after join.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct WorkerSummary {
    pub initial_marks: usize,
    pub expansion_marks: usize,
    pub iterations: u32,
    pub converged: bool,
    pub crashed: bool,
}

pub(crate) fn inverse_out_degrees(graph: &Graph) -> Vec<f64> {
    (0..graph.num_vertices() as u32)
        .map(|u| 1.0 / graph.out_degree(u) as f64)
        .collect()
}
