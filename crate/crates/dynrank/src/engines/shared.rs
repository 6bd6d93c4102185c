//! Shared rank storage for concurrent workers.

use std::sync::atomic::{AtomicU64, Ordering};

/// Rank vector readable and writable from all workers. Entries are f64
/// bit patterns in atomics, so every read sees some fully written value
/// (possibly stale, never torn). Rank traffic itself carries no ordering
/// obligations; the asynchronous engines tolerate stale reads by design,
/// so relaxed ordering is enough.
pub(crate) struct SharedRanks {
    bits: Box<[AtomicU64]>,
}

impl SharedRanks {
    pub fn from_slice(values: &[f64]) -> Self {
        Self {
            bits: values.iter().map(|v| AtomicU64::new(v.to_bits())).collect(),
        }
    }

    #[inline]
    pub fn get(&self, v: usize) -> f64 {
        f64::from_bits(self.bits[v].load(Ordering::Relaxed))
    }

    #[inline]
    pub fn set(&self, v: usize, value: f64) {
        self.bits[v].store(value.to_bits(), Ordering::Relaxed);
    }

    /// Stores `value` only if the cell still holds the bits of `expected`.
    /// Lets a writer detect that the cell moved since it sampled its
    /// inputs: a failed exchange means a fresher update already landed,
    /// and the stale result should be dropped rather than published.
    #[inline]
    pub fn try_replace(&self, v: usize, expected: f64, value: f64) -> bool {
        self.bits[v]
            .compare_exchange(
                expected.to_bits(),
                value.to_bits(),
                Ordering::Relaxed,
                Ordering::Relaxed,
            )
            .is_ok()
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.bits
            .iter()
            .map(|b| f64::from_bits(b.load(Ordering::Relaxed)))
            .collect()
    }
}
