//! Experiment configuration: defaults, JSON config file, and CLI flags,
//! merged in ascending precedence (flags win, then file, then defaults).

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use dynrank::{BatchMode, EngineId, FaultPlan, GraphFormat, PageRankConfig};

/// Every knob, optional. The JSON config file deserializes straight into
/// this; CLI flags populate another instance layered on top.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub graph: Option<PathBuf>,
    pub format: Option<String>,
    pub engine: Option<String>,

    pub damping: Option<f64>,
    pub iteration_tolerance: Option<f64>,
    pub frontier_tolerance: Option<f64>,
    pub max_iterations: Option<u32>,
    pub chunk_size: Option<usize>,
    pub threads: Option<usize>,
    pub static_schedule: Option<bool>,
    pub chunk_convergence: Option<bool>,

    pub batch_fraction: Option<f64>,
    pub batch_mode: Option<String>,
    pub batch_count: Option<usize>,
    pub initial_load_fraction: Option<f64>,
    pub seed: Option<u64>,
    pub batch_file: Option<PathBuf>,

    pub delay_probability: Option<f64>,
    pub delay_duration_ms: Option<u64>,
    pub virtual_clock: Option<bool>,
    pub crash_count: Option<usize>,
    pub crash_trigger_horizon: Option<u32>,
    pub fault_seed: Option<u64>,

    pub out: Option<PathBuf>,
    pub repetitions: Option<usize>,

    // Sweep lists (faultsim / stability / scaling).
    pub delay_probabilities: Option<Vec<f64>>,
    pub delay_durations_ms: Option<Vec<u64>>,
    pub crash_counts: Option<Vec<usize>>,
    pub fractions: Option<Vec<f64>>,
    pub stability_seeds: Option<u64>,
    pub thread_list: Option<Vec<usize>>,
}

macro_rules! take_first {
    ($over:expr, $under:expr; $($field:ident),+ $(,)?) => {
        $( if $over.$field.is_none() { $over.$field = $under.$field; } )+
    };
}

impl PartialConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        serde_json::from_str(&text)
            .with_context(|| format!("cannot parse config file {}", path.display()))
    }

    /// Fills unset fields of `self` from `under`.
    pub fn or(mut self, under: PartialConfig) -> PartialConfig {
        take_first!(self, under;
            graph, format, engine,
            damping, iteration_tolerance, frontier_tolerance, max_iterations,
            chunk_size, threads, static_schedule, chunk_convergence,
            batch_fraction, batch_mode, batch_count, initial_load_fraction,
            seed, batch_file,
            delay_probability, delay_duration_ms, virtual_clock, crash_count,
            crash_trigger_horizon, fault_seed,
            out, repetitions,
            delay_probabilities, delay_durations_ms, crash_counts,
            fractions, stability_seeds, thread_list,
        );
        self
    }
}

/// A fully resolved experiment.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub graph: PathBuf,
    pub format: Option<GraphFormat>,
    pub engine: EngineId,
    pub pagerank: PageRankConfig,
    pub batch_fraction: f64,
    /// None means auto: temporal replay when the input carries timestamps,
    /// random mixed otherwise.
    pub batch_mode: Option<BatchMode>,
    pub batch_count: usize,
    pub initial_load_fraction: f64,
    pub seed: u64,
    pub batch_file: Option<PathBuf>,
    pub fault_plan: FaultPlan,
    pub out: Option<PathBuf>,
    pub repetitions: usize,
    pub delay_probabilities: Option<Vec<f64>>,
    pub delay_durations_ms: Option<Vec<u64>>,
    pub crash_counts: Option<Vec<usize>>,
    pub fractions: Vec<f64>,
    pub stability_seeds: u64,
    pub thread_list: Option<Vec<usize>>,
}

fn default_threads() -> Result<usize> {
    if let Ok(raw) = std::env::var("DYNRANK_THREADS") {
        let parsed: usize = raw
            .parse()
            .with_context(|| format!("DYNRANK_THREADS must be a positive integer, got '{raw}'"))?;
        if parsed == 0 {
            bail!("DYNRANK_THREADS must be a positive integer, got '0'");
        }
        return Ok(parsed);
    }
    Ok(std::thread::available_parallelism().map_or(1, |p| p.get()))
}

/// Resolves a merged partial config against defaults, validating everything
/// that can fail before any work starts.
pub fn resolve(partial: PartialConfig, needs_engine: bool) -> Result<ExperimentConfig> {
    let graph = partial
        .graph
        .context("no graph given (pass --graph or set \"graph\" in the config file)")?;
    let format = partial
        .format
        .as_deref()
        .map(|s| s.parse::<GraphFormat>().map_err(anyhow::Error::msg))
        .transpose()?;
    let engine = match partial.engine.as_deref() {
        Some(s) => s.parse::<EngineId>().map_err(anyhow::Error::msg)?,
        None if needs_engine => bail!("no engine given (pass --engine; valid ids: {})", {
            let ids: Vec<&str> = EngineId::ALL.iter().map(|e| e.as_str()).collect();
            ids.join(", ")
        }),
        None => EngineId::DfLf,
    };

    let defaults = PageRankConfig::default();
    let pagerank = PageRankConfig {
        damping: partial.damping.unwrap_or(defaults.damping),
        iteration_tolerance: partial
            .iteration_tolerance
            .unwrap_or(defaults.iteration_tolerance),
        frontier_tolerance: partial
            .frontier_tolerance
            .unwrap_or(defaults.frontier_tolerance),
        max_iterations: partial.max_iterations.unwrap_or(defaults.max_iterations),
        chunk_size: partial.chunk_size.unwrap_or(defaults.chunk_size),
        num_threads: match partial.threads {
            Some(0) => bail!("--threads must be positive"),
            Some(t) => t,
            None => default_threads()?,
        },
        static_schedule: partial.static_schedule.unwrap_or(false),
        chunk_convergence: partial.chunk_convergence.unwrap_or(false),
    };
    if !(pagerank.damping > 0.0 && pagerank.damping < 1.0) {
        bail!("--damping must be in (0, 1), got {}", pagerank.damping);
    }
    if pagerank.iteration_tolerance <= 0.0 || pagerank.frontier_tolerance <= 0.0 {
        bail!("tolerances must be positive");
    }
    if pagerank.max_iterations == 0 {
        bail!("--max-iterations must be at least 1");
    }
    if pagerank.chunk_size == 0 {
        bail!("--chunk-size must be at least 1");
    }

    let batch_mode = partial
        .batch_mode
        .as_deref()
        .map(|s| s.parse::<BatchMode>().map_err(anyhow::Error::msg))
        .transpose()?;

    let fault_defaults = FaultPlan::default();
    let fault_plan = FaultPlan {
        delay_probability: partial
            .delay_probability
            .unwrap_or(fault_defaults.delay_probability),
        delay_duration_ms: partial
            .delay_duration_ms
            .unwrap_or(fault_defaults.delay_duration_ms),
        virtual_clock: partial.virtual_clock.unwrap_or(fault_defaults.virtual_clock),
        crash_count: partial.crash_count.unwrap_or(fault_defaults.crash_count),
        crash_trigger_horizon: partial
            .crash_trigger_horizon
            .unwrap_or(fault_defaults.crash_trigger_horizon),
        rng_seed: partial.fault_seed.unwrap_or(partial.seed.unwrap_or(0)),
    };

    let repetitions = partial.repetitions.unwrap_or(1);
    if repetitions == 0 {
        bail!("--repetitions must be at least 1");
    }

    Ok(ExperimentConfig {
        graph,
        format,
        engine,
        pagerank,
        batch_fraction: partial.batch_fraction.unwrap_or(1e-3),
        batch_mode,
        batch_count: partial.batch_count.unwrap_or(1),
        initial_load_fraction: partial.initial_load_fraction.unwrap_or(0.9),
        seed: partial.seed.unwrap_or(0),
        batch_file: partial.batch_file,
        fault_plan,
        out: partial.out,
        repetitions,
        delay_probabilities: partial.delay_probabilities,
        delay_durations_ms: partial.delay_durations_ms,
        crash_counts: partial.crash_counts,
        fractions: partial.fractions.unwrap_or_else(|| vec![1e-4, 1e-3, 1e-2]),
        stability_seeds: partial.stability_seeds.unwrap_or(10),
        thread_list: partial.thread_list,
    })
}
