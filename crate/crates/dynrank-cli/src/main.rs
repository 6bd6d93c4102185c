//! dynrank: PageRank-over-dynamic-graphs experiment harness.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::PartialConfig;

#[derive(Parser)]
#[command(
    name = "dynrank",
    version,
    about = "Parallel PageRank on dynamic graphs: engines, fault injection, benchmarks",
    after_help = "Flags override the --config JSON file, which overrides built-in defaults.\n\
                  DYNRANK_THREADS sets the default worker count."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an engine over generated or replayed batches; one CSV row per run
    Run(RunArgs),
    /// Sweep fault parameters (delays, crashes) over an engine
    Faultsim(FaultsimArgs),
    /// Delete-then-reinsert round trips; reports rank drift per seed
    Stability(StabilityArgs),
    /// Same run at several thread counts; reports time, speedup, error
    Scaling(ScalingArgs),
    /// Generate one random batch and write it as a CSV edit script
    Genbatch(GenbatchArgs),
}

/// Flags shared by every command.
#[derive(Args)]
struct CommonArgs {
    /// Layer of defaults in JSON; flags override it field by field
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Input graph (MatrixMarket .mtx or whitespace edge list)
    #[arg(long, value_name = "FILE")]
    graph: Option<PathBuf>,
    /// Force input format: mtx | edges (default: by extension/content)
    #[arg(long)]
    format: Option<String>,
    /// Report destination (default: stdout)
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EngineArgs {
    /// static-bb | static-lf | nd-bb | nd-lf | dt-bb | dt-lf | df-bb | df-lf
    #[arg(long)]
    engine: Option<String>,
}

#[derive(Args)]
struct PageRankArgs {
    /// Damping factor in (0, 1)
    #[arg(long)]
    damping: Option<f64>,
    /// L-inf convergence threshold per iteration
    #[arg(long)]
    iteration_tolerance: Option<f64>,
    /// Rank-change threshold that expands the dynamic frontier
    #[arg(long)]
    frontier_tolerance: Option<f64>,
    #[arg(long)]
    max_iterations: Option<u32>,
    /// Vertices per scheduled work chunk
    #[arg(long)]
    chunk_size: Option<usize>,
    /// Worker count (default: DYNRANK_THREADS or all cores)
    #[arg(long)]
    threads: Option<usize>,
    /// true pins chunks to workers; barrier engines then replay bit-identically
    #[arg(long, value_name = "BOOL")]
    static_schedule: Option<bool>,
    /// true caches all-clear chunks in the lock-free termination scan
    #[arg(long, value_name = "BOOL")]
    chunk_convergence: Option<bool>,
}

#[derive(Args)]
struct BatchArgs {
    /// Batch size as a fraction of the snapshot's (non-self-loop) edges
    #[arg(long)]
    batch_fraction: Option<f64>,
    /// random-mixed | random-deletions-only | random-insertions-only |
    /// temporal-replay (default: temporal-replay for timestamped input)
    #[arg(long)]
    batch_mode: Option<String>,
    /// Random batches to draw (seed, seed+1, ...)
    #[arg(long)]
    batch_count: Option<usize>,
    /// Fraction of a temporal stream loaded before replay
    #[arg(long)]
    initial_load_fraction: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Apply one batch from a CSV edit script instead of generating
    #[arg(long, value_name = "FILE")]
    batch_file: Option<PathBuf>,
}

#[derive(Args)]
struct FaultArgs {
    /// Probability a vertex computation is followed by a delay
    #[arg(long)]
    delay_probability: Option<f64>,
    #[arg(long)]
    delay_duration_ms: Option<u64>,
    /// true records delays on a virtual clock instead of sleeping
    #[arg(long, value_name = "BOOL")]
    virtual_clock: Option<bool>,
    /// Workers to crash-stop (lock-free engines only; must leave a survivor)
    #[arg(long)]
    crash_count: Option<usize>,
    /// Compute passes over which crash triggers are drawn
    #[arg(long)]
    crash_trigger_horizon: Option<u32>,
    /// Seed for fault draws (default: --seed)
    #[arg(long)]
    fault_seed: Option<u64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    engine: EngineArgs,
    #[command(flatten)]
    pagerank: PageRankArgs,
    #[command(flatten)]
    batch: BatchArgs,
    /// Repeat each batch this many times (rows differ only in seconds)
    #[arg(long)]
    repetitions: Option<usize>,
}

#[derive(Args)]
struct FaultsimArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    engine: EngineArgs,
    #[command(flatten)]
    pagerank: PageRankArgs,
    #[command(flatten)]
    batch: BatchArgs,
    #[command(flatten)]
    faults: FaultArgs,
    /// Sweep list, e.g. 1e-6,1e-5 (default: the single --delay-probability)
    #[arg(long, value_delimiter = ',')]
    delay_probabilities: Option<Vec<f64>>,
    /// Sweep list in ms, e.g. 50,100,200
    #[arg(long, value_delimiter = ',')]
    delay_durations_ms: Option<Vec<u64>>,
    /// Sweep list, e.g. 0,1,2,4
    #[arg(long, value_delimiter = ',')]
    crash_counts: Option<Vec<usize>>,
    #[arg(long)]
    repetitions: Option<usize>,
}

#[derive(Args)]
struct StabilityArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    engine: EngineArgs,
    #[command(flatten)]
    pagerank: PageRankArgs,
    /// Deletion fractions to round-trip, e.g. 1e-4,1e-3,1e-2
    #[arg(long, value_delimiter = ',')]
    fractions: Option<Vec<f64>>,
    /// Seeds per fraction (seed, seed+1, ...)
    #[arg(long)]
    stability_seeds: Option<u64>,
    /// First seed
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct ScalingArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    engine: EngineArgs,
    #[command(flatten)]
    pagerank: PageRankArgs,
    #[command(flatten)]
    batch: BatchArgs,
    /// Thread counts to sweep, e.g. 1,2,4 (default: powers of two up to cores)
    #[arg(long, value_delimiter = ',')]
    thread_list: Option<Vec<usize>>,
}

#[derive(Args)]
struct GenbatchArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    batch: BatchArgs,
}

impl CommonArgs {
    fn into_partial(self) -> anyhow::Result<PartialConfig> {
        let mut p = PartialConfig {
            graph: self.graph,
            format: self.format,
            out: self.out,
            ..PartialConfig::default()
        };
        if let Some(path) = self.config {
            // Flags already in `p` stay; the file fills the rest.
            p = p.or(PartialConfig::load(&path)?);
        }
        Ok(p)
    }
}

impl EngineArgs {
    fn apply(self, p: &mut PartialConfig) {
        p.engine = self.engine.or(p.engine.take());
    }
}

impl PageRankArgs {
    fn apply(self, p: &mut PartialConfig) {
        p.damping = self.damping.or(p.damping.take());
        p.iteration_tolerance = self.iteration_tolerance.or(p.iteration_tolerance.take());
        p.frontier_tolerance = self.frontier_tolerance.or(p.frontier_tolerance.take());
        p.max_iterations = self.max_iterations.or(p.max_iterations.take());
        p.chunk_size = self.chunk_size.or(p.chunk_size.take());
        p.threads = self.threads.or(p.threads.take());
        p.static_schedule = self.static_schedule.or(p.static_schedule.take());
        p.chunk_convergence = self.chunk_convergence.or(p.chunk_convergence.take());
    }
}

impl BatchArgs {
    fn apply(self, p: &mut PartialConfig) {
        p.batch_fraction = self.batch_fraction.or(p.batch_fraction.take());
        p.batch_mode = self.batch_mode.or(p.batch_mode.take());
        p.batch_count = self.batch_count.or(p.batch_count.take());
        p.initial_load_fraction = self
            .initial_load_fraction
            .or(p.initial_load_fraction.take());
        p.seed = self.seed.or(p.seed.take());
        p.batch_file = self.batch_file.or(p.batch_file.take());
    }
}

impl FaultArgs {
    fn apply(self, p: &mut PartialConfig) {
        p.delay_probability = self.delay_probability.or(p.delay_probability.take());
        p.delay_duration_ms = self.delay_duration_ms.or(p.delay_duration_ms.take());
        p.virtual_clock = self.virtual_clock.or(p.virtual_clock.take());
        p.crash_count = self.crash_count.or(p.crash_count.take());
        p.crash_trigger_horizon = self
            .crash_trigger_horizon
            .or(p.crash_trigger_horizon.take());
        p.fault_seed = self.fault_seed.or(p.fault_seed.take());
    }
}

fn dispatch(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Run(args) => {
            let mut p = args.common.into_partial()?;
            args.engine.apply(&mut p);
            args.pagerank.apply(&mut p);
            args.batch.apply(&mut p);
            p.repetitions = args.repetitions.or(p.repetitions.take());
            commands::cmd_run(&config::resolve(p, true)?)
        }
        Command::Faultsim(args) => {
            let mut p = args.common.into_partial()?;
            args.engine.apply(&mut p);
            args.pagerank.apply(&mut p);
            args.batch.apply(&mut p);
            args.faults.apply(&mut p);
            p.delay_probabilities = args.delay_probabilities.or(p.delay_probabilities.take());
            p.delay_durations_ms = args.delay_durations_ms.or(p.delay_durations_ms.take());
            p.crash_counts = args.crash_counts.or(p.crash_counts.take());
            p.repetitions = args.repetitions.or(p.repetitions.take());
            commands::cmd_faultsim(&config::resolve(p, true)?)
        }
        Command::Stability(args) => {
            let mut p = args.common.into_partial()?;
            args.engine.apply(&mut p);
            args.pagerank.apply(&mut p);
            p.fractions = args.fractions.or(p.fractions.take());
            p.stability_seeds = args.stability_seeds.or(p.stability_seeds.take());
            p.seed = args.seed.or(p.seed.take());
            commands::cmd_stability(&config::resolve(p, true)?)
        }
        Command::Scaling(args) => {
            let mut p = args.common.into_partial()?;
            args.engine.apply(&mut p);
            args.pagerank.apply(&mut p);
            args.batch.apply(&mut p);
            p.thread_list = args.thread_list.or(p.thread_list.take());
            commands::cmd_scaling(&config::resolve(p, true)?)
        }
        Command::Genbatch(args) => {
            let mut p = args.common.into_partial()?;
            args.batch.apply(&mut p);
            commands::cmd_genbatch(&config::resolve(p, false)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
