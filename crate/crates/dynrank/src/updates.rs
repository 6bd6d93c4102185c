//! Batch-update generation: random edge batches against a snapshot, and
//! temporal-replay batching of timestamped edge streams.
//!
//! All generation is deterministic: the same graph, spec, and seed always
//! produce byte-identical batches.

use std::collections::HashSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{build_graph, BatchUpdate, Graph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BatchMode {
    RandomMixed,
    RandomDeletionsOnly,
    RandomInsertionsOnly,
    TemporalReplay,
}

impl BatchMode {
    pub fn is_random(self) -> bool {
        self != BatchMode::TemporalReplay
    }
}

impl std::str::FromStr for BatchMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random-mixed" => Ok(BatchMode::RandomMixed),
            "random-deletions-only" => Ok(BatchMode::RandomDeletionsOnly),
            "random-insertions-only" => Ok(BatchMode::RandomInsertionsOnly),
            "temporal-replay" => Ok(BatchMode::TemporalReplay),
            other => Err(format!(
                "unknown batch mode '{other}' (expected random-mixed, \
                 random-deletions-only, random-insertions-only, or temporal-replay)"
            )),
        }
    }
}

impl std::fmt::Display for BatchMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            BatchMode::RandomMixed => "random-mixed",
            BatchMode::RandomDeletionsOnly => "random-deletions-only",
            BatchMode::RandomInsertionsOnly => "random-insertions-only",
            BatchMode::TemporalReplay => "temporal-replay",
        };
        f.write_str(s)
    }
}

/// Parameters for batch generation. `size_fraction` is a fraction of the
/// snapshot's non-self-loop edge count in random modes, or of the total
/// stream length in temporal mode.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BatchSpec {
    pub size_fraction: f64,
    pub mode: BatchMode,
    pub rng_seed: u64,
    /// Fraction of a temporal stream loaded before replay begins.
    pub initial_load_fraction: f64,
}

impl BatchSpec {
    pub fn new(size_fraction: f64, mode: BatchMode, rng_seed: u64) -> Self {
        Self {
            size_fraction,
            mode,
            rng_seed,
            initial_load_fraction: 0.9,
        }
    }

    fn validate(&self) -> Result<(), UpdateError> {
        if !(self.size_fraction > 0.0 && self.size_fraction <= 1.0) {
            return Err(UpdateError::InvalidSpec(format!(
                "size_fraction must be in (0, 1], got {}",
                self.size_fraction
            )));
        }
        if !(self.initial_load_fraction > 0.0 && self.initial_load_fraction < 1.0) {
            return Err(UpdateError::InvalidSpec(format!(
                "initial_load_fraction must be in (0, 1), got {}",
                self.initial_load_fraction
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum UpdateError {
    #[error("invalid batch spec: {0}")]
    InvalidSpec(String),
    #[error("mode {actual} not valid here (expected {expected})")]
    ModeMismatch { expected: &'static str, actual: BatchMode },
    #[error("requested {requested} deletions but only {available} non-self-loop edges exist")]
    TooManyDeletions { requested: usize, available: usize },
    #[error("requested {requested} insertions but only {available} non-adjacent pairs exist")]
    TooManyInsertions { requested: usize, available: usize },
    #[error("temporal stream is empty")]
    EmptyStream,
    #[error("batch size rounds to zero ({entries} stream entries at fraction {fraction})")]
    ZeroBatchSize { entries: usize, fraction: f64 },
    #[error(transparent)]
    Graph(#[from] crate::graph::GraphError),
}

/// Generates a random batch against a snapshot. Deletions are sampled
/// uniformly without replacement from existing non-self-loop edges;
/// insertions are uniformly chosen currently-non-adjacent vertex pairs,
/// distinct from each other. The total is `round(size_fraction x |E|)`
/// (non-self-loop edges); odd mixed totals give deletions the extra edge.
pub fn generate_random_batch(graph: &Graph, spec: &BatchSpec) -> Result<BatchUpdate, UpdateError> {
    spec.validate()?;
    if !spec.mode.is_random() {
        return Err(UpdateError::ModeMismatch {
            expected: "a random mode",
            actual: spec.mode,
        });
    }
    let existing: Vec<(u32, u32)> = graph.edges().filter(|&(u, v)| u != v).collect();
    let base = existing.len();
    let total = (spec.size_fraction * base as f64).round() as usize;
    let (num_del, num_ins) = match spec.mode {
        BatchMode::RandomMixed => (total.div_ceil(2), total / 2),
        BatchMode::RandomDeletionsOnly => (total, 0),
        BatchMode::RandomInsertionsOnly => (0, total),
        BatchMode::TemporalReplay => unreachable!(),
    };
    if num_del > base {
        return Err(UpdateError::TooManyDeletions {
            requested: num_del,
            available: base,
        });
    }
    let n = graph.num_vertices();
    let non_adjacent_pairs = n * (n - 1) - base;
    if num_ins > non_adjacent_pairs {
        return Err(UpdateError::TooManyInsertions {
            requested: num_ins,
            available: non_adjacent_pairs,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let deletions: Vec<(u32, u32)> = rand::seq::index::sample(&mut rng, base, num_del)
        .into_iter()
        .map(|i| existing[i])
        .collect();
    let insertions = sample_insertions(graph, num_ins, base, &mut rng);
    Ok(BatchUpdate::new(deletions, insertions))
}

/// Uniformly samples `count` distinct non-adjacent ordered pairs. Rejection
/// sampling is used below 50% density; dense graphs fall back to
/// enumerating all non-edges so sampling always terminates.
fn sample_insertions(
    graph: &Graph,
    count: usize,
    non_self_loop_edges: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<(u32, u32)> {
    if count == 0 {
        return Vec::new();
    }
    let n = graph.num_vertices();
    let density = non_self_loop_edges as f64 / (n as f64 * (n as f64 - 1.0));
    if density > 0.5 || count * 2 > n * (n - 1) - non_self_loop_edges {
        let non_edges: Vec<(u32, u32)> = (0..n as u32)
            .flat_map(|u| (0..n as u32).map(move |v| (u, v)))
            .filter(|&(u, v)| u != v && !graph.has_edge(u, v))
            .collect();
        return rand::seq::index::sample(rng, non_edges.len(), count)
            .into_iter()
            .map(|i| non_edges[i])
            .collect();
    }
    let mut chosen: HashSet<(u32, u32)> = HashSet::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let u = rng.random_range(0..n as u32);
        let v = rng.random_range(0..n as u32);
        if u == v || graph.has_edge(u, v) || !chosen.insert((u, v)) {
            continue;
        }
        out.push((u, v));
    }
    out
}

/// Splits a temporal edge stream into an initial snapshot (the first
/// `floor(initial_load_fraction x |E_T|)` entries) and insertion-only
/// batches of `round(size_fraction x |E_T|)` raw entries each, in stream
/// order. Entries already present in the evolving graph (including
/// duplicates within a batch) are filtered out so every batch applies
/// cleanly; batches that filter to empty are kept to preserve the chunk
/// arithmetic. The vertex set spans the whole stream.
pub fn temporal_batches(
    edge_stream: &[(u32, u32)],
    spec: &BatchSpec,
) -> Result<(Graph, Vec<BatchUpdate>), UpdateError> {
    spec.validate()?;
    if spec.mode != BatchMode::TemporalReplay {
        return Err(UpdateError::ModeMismatch {
            expected: "temporal-replay",
            actual: spec.mode,
        });
    }
    if edge_stream.is_empty() {
        return Err(UpdateError::EmptyStream);
    }
    let entries = edge_stream.len();
    let batch_size = (spec.size_fraction * entries as f64).round() as usize;
    if batch_size == 0 {
        return Err(UpdateError::ZeroBatchSize {
            entries,
            fraction: spec.size_fraction,
        });
    }
    let num_vertices = edge_stream
        .iter()
        .flat_map(|&(u, v)| [u, v])
        .max()
        .unwrap() as usize
        + 1;
    let load = (spec.initial_load_fraction * entries as f64).floor() as usize;
    let initial = build_graph(&edge_stream[..load], num_vertices, true)?;

    // Self-loops are structural, so they sit in the evolving set from the
    // start and stream self-loop entries are filtered like duplicates.
    let mut present: HashSet<(u32, u32)> = initial.edges().collect();
    let mut batches = Vec::new();
    for chunk in edge_stream[load..].chunks(batch_size) {
        let mut insertions = Vec::with_capacity(chunk.len());
        for &(u, v) in chunk {
            if present.insert((u, v)) {
                insertions.push((u, v));
            }
        }
        batches.push(BatchUpdate::new(Vec::new(), insertions));
    }
    Ok((initial, batches))
}
