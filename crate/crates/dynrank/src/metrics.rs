//! Reference oracle, accuracy/stability scoring, scaling sweeps, and the
//! CSV row shapes the command-line harness emits.

use thiserror::Error;

use crate::engines::{
    linf_norm, run_engine, EngineError, EngineId, PageRankConfig, RankVector, RunReport,
};
use crate::graph::{apply_batch, BatchError, BatchUpdate, Graph};
use crate::updates::{generate_random_batch, BatchMode, BatchSpec, UpdateError};

/// Sequential synchronous PageRank, the accuracy yardstick for every
/// engine. Deliberately shares no iteration machinery with the engines: a
/// plain two-buffer Jacobi loop, ranks divided by out-degree at use, run
/// for 500 iterations or until an iteration changes nothing at all.
pub fn reference_pagerank(graph: &Graph, damping: f64) -> RankVector {
    let n = graph.num_vertices();
    if n == 0 {
        return Vec::new();
    }
    let base = (1.0 - damping) / n as f64;
    let mut ranks = vec![1.0 / n as f64; n];
    let mut next = vec![0.0f64; n];
    for _ in 0..500 {
        let mut change = 0.0f64;
        for v in 0..n {
            let mut r = base;
            for &u in graph.in_neighbors(v as u32) {
                r += damping * ranks[u as usize] / graph.out_degree(u) as f64;
            }
            next[v] = r;
            change = change.max((r - ranks[v]).abs());
        }
        std::mem::swap(&mut ranks, &mut next);
        if change == 0.0 {
            break;
        }
    }
    ranks
}

/// L-inf distance of `ranks` from the reference solution on `graph`.
pub fn error_vs_reference(ranks: &[f64], graph: &Graph, damping: f64) -> Result<f64, EngineError> {
    linf_norm(ranks, &reference_pagerank(graph, damping))
}

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error(transparent)]
    Update(#[from] UpdateError),
    #[error(transparent)]
    Batch(#[from] BatchError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Measures rank stability as a delete-then-reinsert round trip: sample a
/// deletion batch of the given fraction, run the engine across the
/// deletion and then across the exact inverse batch, and return the L-inf
/// distance between the final ranks and the original graph's ranks. An
/// engine that tracks updates faithfully lands back within
/// iteration-tolerance territory; the distance is the stability score
/// (lower is better).
///
/// The yardstick (which also seeds the first warm start) is the
/// fixed-iteration reference rather than a tolerance-stopped engine run:
/// two tolerance-stopped runs each sit up to tol*d/(1-d) from the fixpoint,
/// so comparing them to each other folds both runs' stopping error into
/// the score and can double it past the drift being measured.
pub fn stability_roundtrip(
    graph: &Graph,
    fraction: f64,
    engine: EngineId,
    cfg: &PageRankConfig,
    seed: u64,
) -> Result<f64, MetricsError> {
    let baseline = reference_pagerank(graph, cfg.damping);
    if fraction == 0.0 {
        // Nothing to perturb: the round trip is the identity by definition.
        return Ok(0.0);
    }
    let spec = BatchSpec::new(fraction, BatchMode::RandomDeletionsOnly, seed);
    let batch = generate_random_batch(graph, &spec)?;
    let shrunk = apply_batch(graph, &batch)?;
    let mid = run_engine(engine, graph, &shrunk, &batch, &baseline, cfg)?;
    let back = batch.inverse();
    let restored = apply_batch(&shrunk, &back)?;
    debug_assert_eq!(&restored, graph);
    let report = run_engine(engine, &shrunk, &restored, &back, &mid.ranks, cfg)?;
    Ok(linf_norm(&report.ranks, &baseline)?)
}

/// One row of a thread-scaling sweep.
#[derive(Clone, Debug)]
pub struct ScalingRow {
    pub threads: usize,
    pub seconds: f64,
    /// Wall-time ratio against the sweep's first row.
    pub speedup: f64,
    pub error: f64,
}

/// Runs `engine` over the same (graph, batch) at each thread count and
/// reports wall time, speedup against the first entry, and accuracy
/// against the reference on the updated snapshot.
pub fn scaling_sweep(
    graph: &Graph,
    batch: &BatchUpdate,
    engine: EngineId,
    cfg: &PageRankConfig,
    thread_counts: &[usize],
) -> Result<Vec<ScalingRow>, MetricsError> {
    assert!(!thread_counts.is_empty(), "need at least one thread count");
    let curr = apply_batch(graph, batch)?;
    let baseline = run_engine(
        engine.static_counterpart(),
        graph,
        graph,
        &BatchUpdate::default(),
        &[],
        cfg,
    )?;
    let reference = reference_pagerank(&curr, cfg.damping);
    let mut rows: Vec<ScalingRow> = Vec::with_capacity(thread_counts.len());
    for &threads in thread_counts {
        let run_cfg = PageRankConfig {
            num_threads: threads,
            ..cfg.clone()
        };
        let report = run_engine(engine, graph, &curr, batch, &baseline.ranks, &run_cfg)?;
        let error = linf_norm(&report.ranks, &reference)?;
        let speedup = rows
            .first()
            .map_or(1.0, |first: &ScalingRow| first.seconds / report.wall_time);
        rows.push(ScalingRow {
            threads,
            seconds: report.wall_time,
            speedup,
            error,
        });
    }
    Ok(rows)
}

pub const RUN_CSV_HEADER: &str =
    "graph,engine,batch_fraction,threads,seed,iterations,seconds,error,affected_initial,affected_total,converged";

pub const SCALING_CSV_HEADER: &str = "threads,seconds,speedup,error";

/// One benchmark run, shaped for the run-report CSV. The affected columns
/// stay empty for engines that do not track an affected set.
#[derive(Clone, Debug)]
pub struct RunRow {
    pub graph: String,
    pub engine: EngineId,
    pub batch_fraction: f64,
    pub threads: usize,
    pub seed: u64,
    pub iterations: u32,
    pub seconds: f64,
    pub error: f64,
    pub affected_initial: Option<usize>,
    pub affected_total: Option<usize>,
    pub converged: bool,
}

impl RunRow {
    pub fn from_report(
        graph: impl Into<String>,
        engine: EngineId,
        batch_fraction: f64,
        threads: usize,
        seed: u64,
        report: &RunReport,
        error: f64,
    ) -> Self {
        Self {
            graph: graph.into(),
            engine,
            batch_fraction,
            threads,
            seed,
            iterations: report.iterations,
            seconds: report.wall_time,
            error,
            affected_initial: report.affected_initial,
            affected_total: report.affected_total,
            converged: report.converged,
        }
    }
}

fn opt(v: Option<usize>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

impl std::fmt::Display for RunRow {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{},{},{},{},{},{},{:.6},{:e},{},{},{}",
            self.graph,
            self.engine,
            self.batch_fraction,
            self.threads,
            self.seed,
            self.iterations,
            self.seconds,
            self.error,
            opt(self.affected_initial),
            opt(self.affected_total),
            self.converged
        )
    }
}

impl std::fmt::Display for ScalingRow {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{},{:.6},{:.3},{:e}",
            self.threads, self.seconds, self.speedup, self.error
        )
    }
}

/// Geometric mean; the conventional aggregate for wall-time ratios.
/// Requires strictly positive inputs.
pub fn geometric_mean(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "geometric mean of nothing");
    assert!(
        values.iter().all(|&v| v > 0.0),
        "geometric mean requires positive values"
    );
    (values.iter().map(|v| v.ln()).sum::<f64>() / values.len() as f64).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;

    #[test]
    fn reference_on_a_symmetric_pair_is_uniform() {
        // Two vertices linking to each other (plus self-loops): symmetry
        // forces equal ranks, and the total mass is 1.
        let g = build_graph(&[(0, 1), (1, 0)], 2, true).unwrap();
        let r = reference_pagerank(&g, 0.85);
        assert!((r[0] - 0.5).abs() < 1e-12);
        assert!((r[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn reference_mass_sums_to_one() {
        let edges = [(0, 1), (1, 2), (2, 0), (2, 3), (3, 0), (1, 4)];
        let g = build_graph(&edges, 5, true).unwrap();
        let r = reference_pagerank(&g, 0.85);
        let total: f64 = r.iter().sum();
        assert!((total - 1.0).abs() < 1e-9, "mass {total}");
    }

    #[test]
    fn geometric_mean_of_powers() {
        assert!((geometric_mean(&[1.0, 4.0]) - 2.0).abs() < 1e-12);
        assert!((geometric_mean(&[2.0, 2.0, 2.0]) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn run_row_formats_missing_affected_as_empty() {
        let row = RunRow {
            graph: "g".into(),
            engine: EngineId::StaticBb,
            batch_fraction: 1e-3,
            threads: 2,
            seed: 1,
            iterations: 10,
            seconds: 0.5,
            error: 1e-10,
            affected_initial: None,
            affected_total: None,
            converged: true,
        };
        let line = row.to_string();
        assert_eq!(line.matches(',').count(), RUN_CSV_HEADER.matches(',').count());
        assert!(line.contains(",,,"), "empty affected columns: {line}");
    }
}
