//! Per-vertex flag vectors shared by the dynamic engines.

use std::sync::atomic::{AtomicU64, AtomicU8, Ordering};

/// `affected` entry values. Barrier-based frontier expansion marks
/// PENDING during an iteration and promotes to ACTIVE between barriers,
/// so the set of vertices processed in an iteration never depends on
/// worker interleaving. Lock-free engines mark ACTIVE directly.
pub const AFFECTED_CLEAR: u8 = 0;
pub const AFFECTED_PENDING: u8 = 1;
pub const AFFECTED_ACTIVE: u8 = 2;

/// Shared flag vectors: `affected` is the frontier/traversal mark set,
/// `checked` records batch sources whose neighborhoods have been marked
/// (lock-free marking phase), and `not_converged` holds the per-vertex
/// convergence bits the lock-free engines scan to decide termination.
pub struct FlagVectors {
    pub affected: Box<[AtomicU8]>,
    pub checked: Box<[AtomicU8]>,
    pub not_converged: Box<[AtomicU8]>,
    /// Lock-free engines couple affected-marking with not_converged.
    track_convergence: bool,
    conv_cache: Option<ConvCache>,
}

/// Per-chunk cache for the termination scan. A chunk observed all-clear at
/// generation g is skipped while its generation is still g; setting any
/// not_converged bit in the chunk bumps the generation after the bit store,
/// so a cached verdict can never outlive a mark: either the scan saw the
/// bump (and rescans, seeing the bit), or it cached the pre-bump generation,
/// which no longer matches.
struct ConvCache {
    chunk_size: usize,
    generation: Box<[AtomicU64]>,
    /// Generation at which the chunk was last seen all-clear; u64::MAX
    /// means never.
    clean_at: Box<[AtomicU64]>,
}

fn zeroed(n: usize) -> Box<[AtomicU8]> {
    (0..n).map(|_| AtomicU8::new(0)).collect()
}

impl FlagVectors {
    /// Flags for a barrier-based engine: convergence is decided by a global
    /// norm, so marking does not touch `not_converged`.
    pub fn barrier_based(num_vertices: usize) -> Self {
        Self {
            affected: zeroed(num_vertices),
            checked: zeroed(num_vertices),
            not_converged: zeroed(num_vertices),
            track_convergence: false,
            conv_cache: None,
        }
    }

    /// Flags for a lock-free engine: marking a vertex affected also flags it
    /// not-converged so the termination scan sees it.
    pub fn lock_free(num_vertices: usize) -> Self {
        Self {
            affected: zeroed(num_vertices),
            checked: zeroed(num_vertices),
            not_converged: zeroed(num_vertices),
            track_convergence: true,
            conv_cache: None,
        }
    }

    /// Lock-free flags whose termination scan skips chunks already seen
    /// all-clear (until re-dirtied).
    pub fn lock_free_with_chunk_cache(num_vertices: usize, chunk_size: usize) -> Self {
        assert!(chunk_size > 0, "chunk_size must be positive");
        let chunks = num_vertices.div_ceil(chunk_size);
        let mut flags = Self::lock_free(num_vertices);
        flags.conv_cache = Some(ConvCache {
            chunk_size,
            generation: (0..chunks).map(|_| AtomicU64::new(0)).collect(),
            clean_at: (0..chunks).map(|_| AtomicU64::new(u64::MAX)).collect(),
        });
        flags
    }

    pub fn num_vertices(&self) -> usize {
        self.affected.len()
    }

    /// Marks `v` affected (active immediately). Returns true when this call
    /// transitioned the vertex out of CLEAR, so concurrent markers can count
    /// set growth without double counting.
    #[inline]
    pub fn mark_affected(&self, v: u32) -> bool {
        let prev = self.affected[v as usize].fetch_max(AFFECTED_ACTIVE, Ordering::AcqRel);
        if self.track_convergence {
            self.set_not_converged(v);
        }
        prev == AFFECTED_CLEAR
    }

    /// Marks `v` pending: it joins the processed set only after the next
    /// promotion. Counts as a CLEAR transition for set-size accounting.
    #[inline]
    pub fn mark_affected_pending(&self, v: u32) -> bool {
        self.affected[v as usize].fetch_max(AFFECTED_PENDING, Ordering::AcqRel) == AFFECTED_CLEAR
    }

    /// Promotes pending marks to active over `range`. Callers partition the
    /// vertex range between barriers, so no marking runs concurrently.
    pub fn promote_pending(&self, range: std::ops::Range<usize>) {
        for v in range {
            let flag = &self.affected[v];
            if flag.load(Ordering::Relaxed) == AFFECTED_PENDING {
                flag.store(AFFECTED_ACTIVE, Ordering::Relaxed);
            }
        }
    }

    /// True when `v` carries any mark, pending or active.
    #[inline]
    pub fn is_affected(&self, v: u32) -> bool {
        self.affected[v as usize].load(Ordering::Acquire) != AFFECTED_CLEAR
    }

    /// True when `v` is active, i.e. eligible for processing this iteration.
    #[inline]
    pub fn is_active(&self, v: u32) -> bool {
        self.affected[v as usize].load(Ordering::Acquire) == AFFECTED_ACTIVE
    }

    /// Sorted ids of all marked vertices (pending marks included: they are
    /// part of the cumulative affected set even if never processed).
    pub fn affected_vertices(&self) -> Vec<u32> {
        (0..self.affected.len() as u32)
            .filter(|&v| self.affected[v as usize].load(Ordering::Acquire) != AFFECTED_CLEAR)
            .collect()
    }

    #[inline]
    pub fn is_checked(&self, v: u32) -> bool {
        self.checked[v as usize].load(Ordering::Acquire) != 0
    }

    /// Publishes `v` as checked. Callers mark the neighborhood first; the
    /// release store makes those marks visible to any worker that sees the
    /// checked bit.
    #[inline]
    pub fn set_checked(&self, v: u32) {
        self.checked[v as usize].store(1, Ordering::Release);
    }

    #[inline]
    pub fn set_not_converged(&self, v: u32) {
        self.not_converged[v as usize].store(1, Ordering::Release);
        if let Some(cache) = &self.conv_cache {
            cache.generation[v as usize / cache.chunk_size].fetch_add(1, Ordering::Release);
        }
    }

    /// Re-flags `v` not-converged unless it already is. The load-then-store
    /// keeps the hot re-arm path read-mostly; losing the race to a concurrent
    /// clear is acceptable because the vertex is recomputed every pass and
    /// re-armed again while its inputs keep moving.
    #[inline]
    pub fn rearm_not_converged(&self, v: u32) {
        if !self.is_not_converged(v) {
            self.set_not_converged(v);
        }
    }

    #[inline]
    pub fn clear_not_converged(&self, v: u32) {
        // Clearing needs no generation bump: a stale "dirty" verdict only
        // costs a rescan, never a wrong exit.
        self.not_converged[v as usize].store(0, Ordering::Release);
    }

    #[inline]
    pub fn is_not_converged(&self, v: u32) -> bool {
        self.not_converged[v as usize].load(Ordering::Acquire) != 0
    }

    /// Sets every not_converged bit; full-sweep lock-free engines start
    /// from "nothing has converged yet" so the all-clear exit is meaningful.
    /// Called before workers spawn, hence no generation traffic.
    pub fn set_all_not_converged(&self) {
        for flag in self.not_converged.iter() {
            flag.store(1, Ordering::Release);
        }
    }

    /// True when no vertex is flagged not-converged. The scan is not atomic
    /// across the vector; a mark racing past the scan front is observed by
    /// the marker's own next scan instead (its bit store is program-ordered
    /// before that scan), so the marking worker keeps iterating until the
    /// vertex genuinely settles.
    pub fn all_converged(&self) -> bool {
        let Some(cache) = &self.conv_cache else {
            return self
                .not_converged
                .iter()
                .all(|flag| flag.load(Ordering::Acquire) == 0);
        };
        let n = self.not_converged.len();
        for (c, clean_at) in cache.clean_at.iter().enumerate() {
            // Read the generation before scanning: if a mark lands during
            // the scan, the bump invalidates the verdict we cache below.
            let gen = cache.generation[c].load(Ordering::Acquire);
            if clean_at.load(Ordering::Acquire) == gen {
                continue;
            }
            let start = c * cache.chunk_size;
            let end = n.min(start + cache.chunk_size);
            for v in start..end {
                if self.not_converged[v].load(Ordering::Acquire) != 0 {
                    return false;
                }
            }
            clean_at.store(gen, Ordering::Release);
        }
        true
    }
}
