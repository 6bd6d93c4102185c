//! Parallel PageRank over dynamic graphs.
//!
//! A graph evolves by batches of edge deletions and insertions; after each
//! batch, ranks are brought back to tolerance by one of eight engines:
//! barrier-based (BB) or lock-free (LF) variants of four update strategies.
//!
//! - Static: recompute from a uniform start.
//! - Naive-dynamic (ND): recompute every vertex, starting from the previous
//!   snapshot's ranks.
//! - Dynamic Traversal (DT): process only the DFS closure reachable from
//!   the batch's endpoints.
//! - Dynamic Frontier (DF): start from the batch endpoints' neighborhoods
//!   and expand incrementally wherever ranks still move.
//!
//! Barrier-based engines synchronize each Jacobi iteration and converge on
//! a global L-inf norm; lock-free engines update one shared vector in place
//! with no synchronization besides atomic loads and stores, tolerate
//! stragglers and crash-stopped workers, and terminate on per-vertex
//! convergence bits. [`faults`] injects delays and crashes to demonstrate
//! exactly that difference, and [`metrics`] holds the reference oracle and
//! measurement harness.
//!
//! Every graph here carries a self-loop on each vertex, the usual trick to
//! avoid dead ends (and the global teleport-correction term) in dynamic
//! settings: see [`graph::build_graph`].

pub mod engines;
pub mod faults;
pub mod graph;
pub mod io;
pub mod metrics;
pub mod updates;

pub use engines::{
    df_bb, df_lf, dt_bb, dt_lf, linf_norm, mark_initial_affected_df, nd_bb, nd_lf,
    rank_contribution, run_engine, run_engine_with_hooks, static_bb, static_lf, visit_dfs,
    EngineError, EngineHooks, EngineId, EnginePhase, FlagVectors, NoHooks, PageRankConfig,
    RankVector, RunReport,
};
pub use faults::{run_with_faults, CrashEvent, FaultError, FaultInjector, FaultPlan, FaultReport};
pub use graph::{
    apply_batch, build_graph, union_out_neighbors, BatchError, BatchUpdate, Graph, GraphError,
};
pub use io::{
    load_edges, read_batch_csv, read_batch_csv_from, write_batch_csv, write_batch_csv_to,
    GraphFormat, LoadError, LoadedEdges,
};
pub use metrics::{
    error_vs_reference, geometric_mean, reference_pagerank, scaling_sweep, stability_roundtrip,
    MetricsError, RunRow, ScalingRow, RUN_CSV_HEADER, SCALING_CSV_HEADER,
};
pub use updates::{generate_random_batch, temporal_batches, BatchMode, BatchSpec, UpdateError};
