//! The five experiment commands. Each resolves into CSV written to --out
//! (or stdout), reproducible for a fixed config and seed modulo the
//! seconds column.

use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};

use dynrank::{
    apply_batch, build_graph, generate_random_batch, linf_norm, load_edges, read_batch_csv,
    reference_pagerank, run_engine, run_with_faults, scaling_sweep, stability_roundtrip,
    temporal_batches, write_batch_csv, BatchMode, BatchSpec, BatchUpdate, EngineId, FaultPlan,
    Graph, LoadedEdges, PageRankConfig, RunRow, ScalingRow, RUN_CSV_HEADER, SCALING_CSV_HEADER,
};

use crate::config::ExperimentConfig;

pub const FAULT_CSV_HEADER: &str = concat!(
    "graph,engine,batch_fraction,threads,seed,iterations,seconds,error,",
    "affected_initial,affected_total,converged,",
    "delay_probability,delay_duration_ms,virtual_clock,crash_count,crashes,",
    "delay_events,virtual_delay_ms"
);

pub const STABILITY_CSV_HEADER: &str = "graph,engine,batch_fraction,seed,error";

fn graph_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn write_report(out: Option<&Path>, lines: &[String]) -> Result<()> {
    match out {
        Some(path) => {
            let mut file = std::fs::File::create(path)
                .with_context(|| format!("cannot create {}", path.display()))?;
            for line in lines {
                writeln!(file, "{line}")?;
            }
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            for line in lines {
                writeln!(lock, "{line}")?;
            }
        }
    }
    Ok(())
}

fn load(cfg: &ExperimentConfig) -> Result<LoadedEdges> {
    Ok(load_edges(&cfg.graph, cfg.format)?)
}

/// Same-flavor static ranks, the warm start for dynamic engines.
fn static_baseline(engine: EngineId, graph: &Graph, pagerank: &PageRankConfig) -> Result<Vec<f64>> {
    let report = run_engine(
        engine.static_counterpart(),
        graph,
        graph,
        &BatchUpdate::default(),
        &[],
        pagerank,
    )?;
    Ok(report.ranks)
}

fn batch_spec(cfg: &ExperimentConfig, mode: BatchMode, seed: u64) -> BatchSpec {
    let mut spec = BatchSpec::new(cfg.batch_fraction, mode, seed);
    spec.initial_load_fraction = cfg.initial_load_fraction;
    spec
}

/// The batches a run-style command iterates: the base snapshot plus one
/// (prev, batch) step per generated/loaded batch. Random batches each apply
/// to the base snapshot; temporal batches chain.
struct RunPlan {
    name: String,
    steps: Vec<(Graph, BatchUpdate)>,
    baseline: Vec<f64>,
    chained: bool,
}

fn plan_batches(cfg: &ExperimentConfig) -> Result<RunPlan> {
    let loaded = load(cfg)?;
    let name = graph_name(&cfg.graph);
    let mode = cfg.batch_mode.unwrap_or(if loaded.temporal {
        BatchMode::TemporalReplay
    } else {
        BatchMode::RandomMixed
    });

    if mode == BatchMode::TemporalReplay {
        if !loaded.temporal {
            bail!(
                "{}: temporal-replay needs a timestamped edge list",
                cfg.graph.display()
            );
        }
        let spec = batch_spec(cfg, mode, cfg.seed);
        let (initial, batches) = temporal_batches(&loaded.edges, &spec)?;
        let baseline = static_baseline(cfg.engine, &initial, &cfg.pagerank)?;
        let mut steps = Vec::with_capacity(batches.len());
        let mut prev = initial;
        for batch in batches {
            let next = apply_batch(&prev, &batch)?;
            steps.push((std::mem::replace(&mut prev, next), batch));
        }
        return Ok(RunPlan {
            name,
            steps,
            baseline,
            chained: true,
        });
    }

    let base = build_graph(&loaded.edges, loaded.num_vertices, true)?;
    let baseline = static_baseline(cfg.engine, &base, &cfg.pagerank)?;
    let batches: Vec<BatchUpdate> = match &cfg.batch_file {
        Some(path) => vec![read_batch_csv(path)?],
        None => (0..cfg.batch_count as u64)
            .map(|i| generate_random_batch(&base, &batch_spec(cfg, mode, cfg.seed + i)))
            .collect::<Result<_, _>>()?,
    };
    let steps = batches.into_iter().map(|b| (base.clone(), b)).collect();
    Ok(RunPlan {
        name,
        steps,
        baseline,
        chained: false,
    })
}

pub fn cmd_run(cfg: &ExperimentConfig) -> Result<()> {
    let plan = plan_batches(cfg)?;
    let mut lines = vec![RUN_CSV_HEADER.to_string()];
    let mut prev_ranks = plan.baseline.clone();
    for (prev, batch) in &plan.steps {
        let curr = apply_batch(prev, batch)?;
        let reference = reference_pagerank(&curr, cfg.pagerank.damping);
        let mut last = None;
        for _ in 0..cfg.repetitions {
            let report = run_engine(cfg.engine, prev, &curr, batch, &prev_ranks, &cfg.pagerank)?;
            let error = linf_norm(&report.ranks, &reference)?;
            lines.push(
                RunRow::from_report(
                    plan.name.clone(),
                    cfg.engine,
                    cfg.batch_fraction,
                    cfg.pagerank.num_threads,
                    cfg.seed,
                    &report,
                    error,
                )
                .to_string(),
            );
            last = Some(report);
        }
        if plan.chained {
            prev_ranks = last.expect("at least one repetition").ranks;
        }
    }
    write_report(cfg.out.as_deref(), &lines)
}

pub fn cmd_faultsim(cfg: &ExperimentConfig) -> Result<()> {
    let plan = plan_batches(cfg)?;
    let probabilities = cfg
        .delay_probabilities
        .clone()
        .unwrap_or_else(|| vec![cfg.fault_plan.delay_probability]);
    let durations = cfg
        .delay_durations_ms
        .clone()
        .unwrap_or_else(|| vec![cfg.fault_plan.delay_duration_ms]);
    let crash_counts = cfg
        .crash_counts
        .clone()
        .unwrap_or_else(|| vec![cfg.fault_plan.crash_count]);
    if cfg.engine.is_barrier_based() && crash_counts.iter().any(|&c| c > 0) {
        bail!(
            "{} is barrier-based: a crashed worker leaves the others waiting \
             at the next barrier forever, so faultsim refuses crash sweeps on \
             it; use a lock-free engine (or crash-counts 0)",
            cfg.engine
        );
    }

    let mut lines = vec![FAULT_CSV_HEADER.to_string()];
    for (prev, batch) in &plan.steps {
        let curr = apply_batch(prev, batch)?;
        let reference = reference_pagerank(&curr, cfg.pagerank.damping);
        for &p in &probabilities {
            for &d in &durations {
                for &c in &crash_counts {
                    let fault_plan = FaultPlan {
                        delay_probability: p,
                        delay_duration_ms: d,
                        crash_count: c,
                        ..cfg.fault_plan.clone()
                    };
                    for _ in 0..cfg.repetitions {
                        let report = run_with_faults(
                            cfg.engine,
                            prev,
                            &curr,
                            batch,
                            &plan.baseline,
                            &cfg.pagerank,
                            &fault_plan,
                        )?;
                        let error = linf_norm(&report.ranks, &reference)?;
                        let faults = report.faults.as_ref().expect("fault run carries a report");
                        let base = RunRow::from_report(
                            plan.name.clone(),
                            cfg.engine,
                            cfg.batch_fraction,
                            cfg.pagerank.num_threads,
                            cfg.seed,
                            &report,
                            error,
                        );
                        lines.push(format!(
                            "{base},{p},{d},{},{c},{},{},{}",
                            fault_plan.virtual_clock,
                            faults.crashes.len(),
                            faults.delay_events,
                            faults.virtual_delay_nanos / 1_000_000,
                        ));
                    }
                }
            }
        }
    }
    write_report(cfg.out.as_deref(), &lines)
}

pub fn cmd_stability(cfg: &ExperimentConfig) -> Result<()> {
    let loaded = load(cfg)?;
    let graph = build_graph(&loaded.edges, loaded.num_vertices, true)?;
    let name = graph_name(&cfg.graph);
    let mut lines = vec![STABILITY_CSV_HEADER.to_string()];
    for &fraction in &cfg.fractions {
        for s in 0..cfg.stability_seeds {
            let seed = cfg.seed + s;
            let error = stability_roundtrip(&graph, fraction, cfg.engine, &cfg.pagerank, seed)?;
            lines.push(format!("{name},{},{fraction},{seed},{error:e}", cfg.engine));
        }
    }
    write_report(cfg.out.as_deref(), &lines)
}

pub fn cmd_scaling(cfg: &ExperimentConfig) -> Result<()> {
    let loaded = load(cfg)?;
    let graph = build_graph(&loaded.edges, loaded.num_vertices, true)?;
    let batch = match &cfg.batch_file {
        Some(path) => read_batch_csv(path)?,
        None => generate_random_batch(
            &graph,
            &batch_spec(cfg, cfg.batch_mode.unwrap_or(BatchMode::RandomMixed), cfg.seed),
        )?,
    };
    let threads = match &cfg.thread_list {
        Some(list) if list.is_empty() => bail!("--thread-list must name at least one count"),
        Some(list) => list.clone(),
        None => {
            let max = std::thread::available_parallelism().map_or(1, |p| p.get());
            std::iter::successors(Some(1usize), |t| Some(t * 2))
                .take_while(|&t| t <= max)
                .collect()
        }
    };
    let rows = scaling_sweep(&graph, &batch, cfg.engine, &cfg.pagerank, &threads)?;
    let mut lines = vec![SCALING_CSV_HEADER.to_string()];
    lines.extend(rows.iter().map(ScalingRow::to_string));
    write_report(cfg.out.as_deref(), &lines)
}

pub fn cmd_genbatch(cfg: &ExperimentConfig) -> Result<()> {
    let loaded = load(cfg)?;
    let mode = cfg.batch_mode.unwrap_or(BatchMode::RandomMixed);
    if mode == BatchMode::TemporalReplay {
        bail!("genbatch draws random batches; temporal streams derive their batches at run time");
    }
    let graph = build_graph(&loaded.edges, loaded.num_vertices, true)?;
    let batch = generate_random_batch(&graph, &batch_spec(cfg, mode, cfg.seed))?;
    let out = cfg
        .out
        .as_deref()
        .context("genbatch needs --out for the batch file")?;
    write_batch_csv(out, &batch)?;
    Ok(())
}
