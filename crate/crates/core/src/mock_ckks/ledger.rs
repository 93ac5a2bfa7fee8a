//! Operation ledger: atomic counters updated by every simulator operation.

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

/// Relative weights used by [`LedgerSnapshot::weighted_cost`]. Keyswitching
/// dominates, so ct-ct products are the most expensive entry; level switches
/// are modulus drops with no keyswitch and are costed at zero.
pub const COST_MUL_CT_CT: u64 = 10;
pub const COST_MUL_CT_PT: u64 = 2;
pub const COST_ROTATE: u64 = 3;
pub const COST_ADD: u64 = 1;
pub const COST_RESCALE: u64 = 2;

/// Live counter set. All updates are relaxed atomics: counts are exact
/// because every update is an unconditional add, and cross-thread ordering
/// of the adds does not matter for totals.
#[derive(Debug, Default)]
pub struct Ledger {
    mul_ct_ct: AtomicU64,
    mul_ct_pt: AtomicU64,
    add: AtomicU64,
    rescale: AtomicU64,
    level_switch: AtomicU64,
    rotate: AtomicU64,
    encrypt_count: AtomicU64,
    decrypt_count: AtomicU64,
    clip_events: AtomicU64,
    live_ciphertexts: AtomicU64,
    peak_live_ciphertexts: AtomicU64,
}

impl Ledger {
    pub fn bump_mul_ct_ct(&self) {
        self.mul_ct_ct.fetch_add(1, Ordering::Relaxed);
    }

    pub fn bump_mul_ct_pt(&self) {
        self.mul_ct_pt.fetch_add(1, Ordering::Relaxed);
    }

    pub fn bump_add(&self) {
        self.add.fetch_add(1, Ordering::Relaxed);
    }

    pub fn bump_rescale(&self) {
        self.rescale.fetch_add(1, Ordering::Relaxed);
    }

    pub fn bump_level_switch(&self) {
        self.level_switch.fetch_add(1, Ordering::Relaxed);
    }

    pub fn bump_rotate(&self) {
        self.rotate.fetch_add(1, Ordering::Relaxed);
    }

    pub fn bump_encrypt(&self) {
        self.encrypt_count.fetch_add(1, Ordering::Relaxed);
    }

    pub fn bump_decrypt(&self) {
        self.decrypt_count.fetch_add(1, Ordering::Relaxed);
    }

    pub fn add_clip_events(&self, n: u64) {
        if n > 0 {
            self.clip_events.fetch_add(n, Ordering::Relaxed);
        }
    }

    /// Registers one more live ciphertext and folds the new total into the
    /// peak watermark.
    pub fn track_alloc(&self) {
        let now = self.live_ciphertexts.fetch_add(1, Ordering::Relaxed) + 1;
        self.peak_live_ciphertexts.fetch_max(now, Ordering::Relaxed);
    }

    pub fn track_release(&self) {
        self.live_ciphertexts.fetch_sub(1, Ordering::Relaxed);
    }

    pub fn snapshot(&self) -> LedgerSnapshot {
        LedgerSnapshot {
            mul_ct_ct: self.mul_ct_ct.load(Ordering::Relaxed),
            mul_ct_pt: self.mul_ct_pt.load(Ordering::Relaxed),
            add: self.add.load(Ordering::Relaxed),
            rescale: self.rescale.load(Ordering::Relaxed),
            level_switch: self.level_switch.load(Ordering::Relaxed),
            rotate: self.rotate.load(Ordering::Relaxed),
            encrypt_count: self.encrypt_count.load(Ordering::Relaxed),
            decrypt_count: self.decrypt_count.load(Ordering::Relaxed),
            clip_events: self.clip_events.load(Ordering::Relaxed),
            live_ciphertexts: self.live_ciphertexts.load(Ordering::Relaxed),
            peak_live_ciphertexts: self.peak_live_ciphertexts.load(Ordering::Relaxed),
        }
    }
}

/// Plain-value copy of the ledger at a point in time.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerSnapshot {
    pub mul_ct_ct: u64,
    pub mul_ct_pt: u64,
    pub add: u64,
    pub rescale: u64,
    pub level_switch: u64,
    pub rotate: u64,
    pub encrypt_count: u64,
    pub decrypt_count: u64,
    pub clip_events: u64,
    pub live_ciphertexts: u64,
    pub peak_live_ciphertexts: u64,
}

impl LedgerSnapshot {
    /// Per-stage delta: monotone counters are subtracted, while the live and
    /// peak gauges carry the current absolute values (a difference of gauges
    /// has no meaning).
    pub fn delta_since(&self, earlier: &LedgerSnapshot) -> LedgerSnapshot {
        LedgerSnapshot {
            mul_ct_ct: self.mul_ct_ct - earlier.mul_ct_ct,
            mul_ct_pt: self.mul_ct_pt - earlier.mul_ct_pt,
            add: self.add - earlier.add,
            rescale: self.rescale - earlier.rescale,
            level_switch: self.level_switch - earlier.level_switch,
            rotate: self.rotate - earlier.rotate,
            encrypt_count: self.encrypt_count - earlier.encrypt_count,
            decrypt_count: self.decrypt_count - earlier.decrypt_count,
            clip_events: self.clip_events - earlier.clip_events,
            live_ciphertexts: self.live_ciphertexts,
            peak_live_ciphertexts: self.peak_live_ciphertexts,
        }
    }

    /// Merges a worker's ledger into an aggregate by field-wise summation.
    /// Peaks sum as well: contexts are per-worker, so the sum is the upper
    /// bound on simultaneously live ciphertexts across the pool.
    pub fn merge(&mut self, other: &LedgerSnapshot) {
        self.mul_ct_ct += other.mul_ct_ct;
        self.mul_ct_pt += other.mul_ct_pt;
        self.add += other.add;
        self.rescale += other.rescale;
        self.level_switch += other.level_switch;
        self.rotate += other.rotate;
        self.encrypt_count += other.encrypt_count;
        self.decrypt_count += other.decrypt_count;
        self.clip_events += other.clip_events;
        self.live_ciphertexts += other.live_ciphertexts;
        self.peak_live_ciphertexts += other.peak_live_ciphertexts;
    }

    /// Scalar cost under the fixed operation weights.
    pub fn weighted_cost(&self) -> u64 {
        COST_MUL_CT_CT * self.mul_ct_ct
            + COST_MUL_CT_PT * self.mul_ct_pt
            + COST_ROTATE * self.rotate
            + COST_ADD * self.add
            + COST_RESCALE * self.rescale
    }
}
