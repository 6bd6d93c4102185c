//! Chunked work distribution between workers.

use std::ops::Range;
use std::sync::atomic::{AtomicUsize, Ordering};

/// Hands out fixed-size chunks of `[0, num_items)`. A pass is one full sweep
/// of the range; each pass has its own claim counter, so lock-free workers
/// that have moved on to a later pass never contend with stragglers still
/// draining an earlier one, and chunks abandoned by a crashed worker are
/// simply re-claimed in subsequent passes. In static mode worker `w` takes
/// chunks `w, w+T, w+2T, ...`, which pins the work assignment (and therefore
/// every store) to a schedule independent of timing.
pub(crate) struct WorkPool {
    num_items: usize,
    chunk_size: usize,
    num_chunks: usize,
    num_workers: usize,
    static_schedule: bool,
    counters: Box<[AtomicUsize]>,
}

impl WorkPool {
    pub fn new(
        num_items: usize,
        chunk_size: usize,
        num_workers: usize,
        max_passes: usize,
        static_schedule: bool,
    ) -> Self {
        assert!(chunk_size > 0, "chunk_size must be positive");
        assert!(num_workers > 0, "num_workers must be positive");
        let num_chunks = num_items.div_ceil(chunk_size);
        Self {
            num_items,
            chunk_size,
            num_chunks,
            num_workers,
            static_schedule,
            counters: (0..max_passes.max(1)).map(|_| AtomicUsize::new(0)).collect(),
        }
    }

    #[cfg(test)]
    pub fn num_chunks(&self) -> usize {
        self.num_chunks
    }

    /// Begins claiming chunks of pass `pass` as worker `worker`.
    pub fn claims(&self, pass: usize, worker: usize) -> PassClaims<'_> {
        assert!(pass < self.counters.len(), "pass beyond pool horizon");
        PassClaims {
            pool: self,
            pass,
            next_static: worker,
            attempts: 0,
        }
    }

    fn chunk_range(&self, chunk: usize) -> Range<usize> {
        let start = chunk * self.chunk_size;
        start..self.num_items.min(start + self.chunk_size)
    }
}

pub(crate) struct PassClaims<'a> {
    pool: &'a WorkPool,
    pass: usize,
    next_static: usize,
    attempts: usize,
}

impl PassClaims<'_> {
    /// Claims the next chunk, or None once the pass is exhausted. Every call
    /// counts as a claim attempt; [`Self::last_attempt`] identifies it for
    /// crash triggering, so an attempt that did claim a chunk can still be
    /// the point where a worker stops, abandoning that chunk.
    pub fn next(&mut self) -> Option<Range<usize>> {
        self.attempts += 1;
        let chunk = if self.pool.static_schedule {
            let c = self.next_static;
            self.next_static += self.pool.num_workers;
            c
        } else {
            self.pool.counters[self.pass].fetch_add(1, Ordering::Relaxed)
        };
        (chunk < self.pool.num_chunks).then(|| self.pool.chunk_range(chunk))
    }

    /// 0-based ordinal of the most recent claim attempt by this worker in
    /// this pass.
    pub fn last_attempt(&self) -> usize {
        self.attempts - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dynamic_pass_covers_range_exactly_once() {
        let pool = WorkPool::new(10, 3, 2, 1, false);
        assert_eq!(pool.num_chunks(), 4);
        let mut a = pool.claims(0, 0);
        let mut b = pool.claims(0, 1);
        let mut seen = Vec::new();
        loop {
            let mut progressed = false;
            if let Some(r) = a.next() {
                seen.extend(r);
                progressed = true;
            }
            if let Some(r) = b.next() {
                seen.extend(r);
                progressed = true;
            }
            if !progressed {
                break;
            }
        }
        seen.sort_unstable();
        assert_eq!(seen, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn passes_have_independent_counters() {
        let pool = WorkPool::new(4, 4, 1, 2, false);
        let mut first = pool.claims(0, 0);
        assert!(first.next().is_some());
        assert!(first.next().is_none());
        let mut second = pool.claims(1, 0);
        assert!(second.next().is_some());
    }

    #[test]
    fn static_schedule_is_strided() {
        let pool = WorkPool::new(10, 2, 2, 1, true);
        let mut w0 = pool.claims(0, 0);
        assert_eq!(w0.next(), Some(0..2));
        assert_eq!(w0.next(), Some(4..6));
        assert_eq!(w0.next(), Some(8..10));
        assert_eq!(w0.next(), None);
        let mut w1 = pool.claims(0, 1);
        assert_eq!(w1.next(), Some(2..4));
        assert_eq!(w1.next(), Some(6..8));
        assert_eq!(w1.next(), None);
        assert_eq!(w1.last_attempt(), 2);
    }

    #[test]
    fn empty_range_yields_no_chunks() {
        let pool = WorkPool::new(0, 8, 3, 1, false);
        assert_eq!(pool.num_chunks(), 0);
        let mut c = pool.claims(0, 2);
        assert_eq!(c.next(), None);
        assert_eq!(c.last_attempt(), 0);
    }
}
