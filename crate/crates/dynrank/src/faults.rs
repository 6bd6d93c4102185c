//! Fault injection: uniformly random per-vertex delays and crash-stop
//! worker failures, driven through the engine hook points.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engines::hooks::{EngineHooks, EnginePhase};
use crate::engines::{run_engine_with_hooks, EngineError, EngineId, PageRankConfig, RunReport};
use crate::graph::{BatchUpdate, Graph};

/// What to inject into a run.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct FaultPlan {
    /// Probability that any single vertex-rank computation is followed by a
    /// delay; expected delays per full sweep are this times |V|.
    pub delay_probability: f64,
    pub delay_duration_ms: u64,
    /// Record delays on a virtual clock instead of sleeping, so delay
    /// statistics can be checked without paying wall time.
    pub virtual_clock: bool,
    /// Workers to crash-stop; must stay below the worker count.
    pub crash_count: usize,
    /// Crash triggers are drawn uniformly over the claim attempts of this
    /// many compute passes. A trigger not reached exactly (a worker may
    /// claim fewer chunks in a pass than the uniform estimate) fires at the
    /// first claim attempt past it; a worker whose run ends before its
    /// trigger stops at the exit boundary instead, so exactly crash_count
    /// workers stop under every schedule.
    pub crash_trigger_horizon: u32,
    pub rng_seed: u64,
}

impl Default for FaultPlan {
    fn default() -> Self {
        Self {
            delay_probability: 0.0,
            delay_duration_ms: 100,
            virtual_clock: false,
            crash_count: 0,
            crash_trigger_horizon: 4,
            rng_seed: 0,
        }
    }
}

impl FaultPlan {
    pub fn validate(&self, num_threads: usize) -> Result<(), FaultError> {
        if !(0.0..=1.0).contains(&self.delay_probability) {
            return Err(FaultError::Plan(format!(
                "delay_probability must be in [0, 1], got {}",
                self.delay_probability
            )));
        }
        if self.crash_count >= num_threads && self.crash_count > 0 {
            return Err(FaultError::Plan(format!(
                "crash_count ({}) must be below the worker count ({}) so at \
                 least one worker survives",
                self.crash_count, num_threads
            )));
        }
        if self.crash_trigger_horizon == 0 {
            return Err(FaultError::Plan(
                "crash_trigger_horizon must be at least one pass".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum FaultError {
    #[error("invalid fault plan: {0}")]
    Plan(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// An armed crash trigger that fired: the worker stopped at its first claim
/// attempt at or past (pass, ordinal), or at loop exit if its run ended
/// first. Records the armed values, so replays under one seed match even
/// though the firing moment is schedule-dependent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CrashEvent {
    pub worker: usize,
    pub pass: usize,
    pub ordinal: usize,
}

/// Fault activity observed during one run.
#[derive(Clone, Debug, Default)]
pub struct FaultReport {
    /// Vertex-rank computations performed, over all workers.
    pub vertex_events: u64,
    /// Delays injected.
    pub delay_events: u64,
    /// Total delay charged to the virtual clock (zero when sleeping).
    pub virtual_delay_nanos: u64,
    /// Triggers that fired, sorted by worker.
    pub crashes: Vec<CrashEvent>,
}

#[repr(align(64))]
struct WorkerFaultState {
    vertex_events: AtomicU64,
    crashed: AtomicBool,
}

/// Engine hooks that inject the faults of a [`FaultPlan`].
///
/// Delay draws are a stateless hash of (seed, worker, per-worker event
/// ordinal), so they are independent of scheduling and cheap enough to
/// evaluate on every vertex computation. Crash triggers are drawn up front
/// from the plan seed: `crash_count` distinct workers each get a (pass,
/// ordinal) claim-attempt trigger; a worker consults its trigger at every
/// chunk claim and stops permanently once past it, abandoning the chunk
/// just claimed. A victim that exits before reaching its trigger stops at
/// the exit boundary, keeping the realized crash count exact.
pub struct FaultInjector {
    plan: FaultPlan,
    delay_threshold: u64,
    triggers: Box<[Option<(usize, usize)>]>,
    workers: Box<[WorkerFaultState]>,
    delay_events: AtomicU64,
    virtual_delay_nanos: AtomicU64,
    crashes: Mutex<Vec<CrashEvent>>,
}

impl FaultInjector {
    /// `claims_per_pass` is the expected chunk-claim attempts per worker in
    /// one compute pass (pool size / chunk size / workers, rounded up); the
    /// ordinal component of each crash trigger is drawn uniformly over it.
    pub fn new(plan: &FaultPlan, num_threads: usize, claims_per_pass: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(plan.rng_seed);
        let mut triggers: Box<[Option<(usize, usize)>]> = (0..num_threads).map(|_| None).collect();
        for w in rand::seq::index::sample(&mut rng, num_threads, plan.crash_count) {
            let pass = rng.random_range(0..plan.crash_trigger_horizon as usize);
            let ordinal = rng.random_range(0..claims_per_pass.max(1) + 1);
            triggers[w] = Some((pass, ordinal));
        }
        let delay_threshold = if plan.delay_probability >= 1.0 {
            u64::MAX
        } else {
            (plan.delay_probability * u64::MAX as f64) as u64
        };
        Self {
            plan: plan.clone(),
            delay_threshold,
            triggers,
            workers: (0..num_threads)
                .map(|_| WorkerFaultState {
                    vertex_events: AtomicU64::new(0),
                    crashed: AtomicBool::new(false),
                })
                .collect(),
            delay_events: AtomicU64::new(0),
            virtual_delay_nanos: AtomicU64::new(0),
            crashes: Mutex::new(Vec::new()),
        }
    }

    /// Delay injection point: called after each vertex-rank computation.
    pub fn delay_hook(&self, worker: usize) {
        let ordinal = self.workers[worker].vertex_events.fetch_add(1, Ordering::Relaxed);
        if self.plan.delay_probability <= 0.0 {
            return;
        }
        let draw = split_mix(
            self.plan
                .rng_seed
                .wrapping_add(split_mix(((worker as u64 + 1) << 56) ^ ordinal)),
        );
        if self.plan.delay_probability >= 1.0 || draw < self.delay_threshold {
            self.delay_events.fetch_add(1, Ordering::Relaxed);
            let nanos = self.plan.delay_duration_ms * 1_000_000;
            if self.plan.virtual_clock {
                self.virtual_delay_nanos.fetch_add(nanos, Ordering::Relaxed);
            } else {
                std::thread::sleep(Duration::from_nanos(nanos));
            }
        }
    }

    /// Crash decision point: called at each compute chunk-claim attempt.
    /// Returns false exactly once per crashing worker.
    pub fn crash_hook(&self, worker: usize, pass: usize, ordinal: usize) -> bool {
        let Some((trigger_pass, trigger_ordinal)) = self.triggers[worker] else {
            return true;
        };
        let state = &self.workers[worker];
        if state.crashed.load(Ordering::Relaxed) {
            return false;
        }
        let past = pass > trigger_pass || (pass == trigger_pass && ordinal >= trigger_ordinal);
        if past {
            state.crashed.store(true, Ordering::Relaxed);
            self.crashes.lock().unwrap().push(CrashEvent {
                worker,
                pass: trigger_pass,
                ordinal: trigger_ordinal,
            });
            return false;
        }
        true
    }

    /// Exit fallback: a worker finishing with an armed, unfired trigger
    /// stops at the exit boundary instead. A fast worker (or one whose
    /// whole run converges early) might otherwise outlive its trigger,
    /// which would make the realized crash count schedule-dependent.
    pub fn exit_hook(&self, worker: usize) {
        if self.triggers[worker].is_none() {
            return;
        }
        let state = &self.workers[worker];
        if state.crashed.load(Ordering::Relaxed) {
            return;
        }
        let (pass, ordinal) = self.triggers[worker].unwrap();
        state.crashed.store(true, Ordering::Relaxed);
        self.crashes.lock().unwrap().push(CrashEvent { worker, pass, ordinal });
    }

    pub fn report(&self) -> FaultReport {
        let mut crashes = self.crashes.lock().unwrap().clone();
        crashes.sort_by_key(|c| c.worker);
        FaultReport {
            vertex_events: self
                .workers
                .iter()
                .map(|s| s.vertex_events.load(Ordering::Relaxed))
                .sum(),
            delay_events: self.delay_events.load(Ordering::Relaxed),
            virtual_delay_nanos: self.virtual_delay_nanos.load(Ordering::Relaxed),
            crashes,
        }
    }
}

impl EngineHooks for FaultInjector {
    fn on_vertex(&self, worker: usize, _vertex: u32) {
        self.delay_hook(worker);
    }

    fn on_chunk_claim(&self, worker: usize, phase: EnginePhase, pass: usize, ordinal: usize) -> bool {
        // Crashes are drawn over rank-computation claims; marking claims
        // pass through so the affected set is never half-built by a lost
        // worker racing the trigger draw.
        if phase != EnginePhase::Compute {
            return true;
        }
        self.crash_hook(worker, pass, ordinal)
    }

    fn on_worker_exit(&self, worker: usize, _pass: usize) {
        self.exit_hook(worker);
    }
}

/// SplitMix64 finalizer; a full-period bijective mixer, used here as a
/// stateless uniform hash.
fn split_mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Runs an engine under a fault plan and attaches the observed fault
/// activity to the report. Validates the plan (a crash-stop run must keep
/// at least one worker). Note that barrier-based engines block forever if
/// any worker crashes; callers wanting to demonstrate that behavior need
/// their own watchdog.
pub fn run_with_faults(
    id: EngineId,
    prev: &Graph,
    curr: &Graph,
    batch: &BatchUpdate,
    prev_ranks: &[f64],
    cfg: &PageRankConfig,
    plan: &FaultPlan,
) -> Result<RunReport, FaultError> {
    plan.validate(cfg.num_threads)?;
    let chunks = curr.num_vertices().div_ceil(cfg.chunk_size);
    let claims_per_pass = chunks.div_ceil(cfg.num_threads).max(1);
    let injector = FaultInjector::new(plan, cfg.num_threads, claims_per_pass);
    let mut report = run_engine_with_hooks(id, prev, curr, batch, prev_ranks, cfg, &injector)?;
    report.faults = Some(injector.report());
    Ok(report)
}
