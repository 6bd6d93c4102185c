//! Engine event hooks. The fault injector lives behind this trait; tests
//! use it to observe scheduling without touching engine internals.

/// Engine phases, as seen by hooks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnginePhase {
    /// Marking initially affected vertices (dynamic traversal/frontier).
    MarkInitial,
    /// Rank iteration passes.
    Compute,
}

/// Callbacks invoked concurrently from all workers; implementations must be
/// Sync. All methods default to no-ops.
pub trait EngineHooks: Sync {
    /// After a vertex's rank has been computed and stored, in any compute
    /// pass. This is the delay-injection point.
    fn on_vertex(&self, _worker: usize, _vertex: u32) {}

    /// At a chunk-claim boundary: `ordinal` is the 0-based attempt count of
    /// this worker within `pass` (the final attempt of a pass finds the pool
    /// empty). Returning false stops the worker permanently, crash-stop
    /// style; a chunk claimed by this attempt is abandoned unprocessed.
    fn on_chunk_claim(
        &self,
        _worker: usize,
        _phase: EnginePhase,
        _pass: usize,
        _ordinal: usize,
    ) -> bool {
        true
    }

    /// When a worker enters a phase.
    fn on_phase(&self, _worker: usize, _phase: EnginePhase) {}

    /// When a worker leaves its compute loop normally, `pass` passes done.
    /// Not invoked after a crash-stop.
    fn on_worker_exit(&self, _worker: usize, _pass: usize) {}
}

/// The default hook set: does nothing.
pub struct NoHooks;

impl EngineHooks for NoHooks {}
