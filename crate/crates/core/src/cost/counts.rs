//! Itemized operation-count model for completed runs.
//!
//! Each formula is a per-stage tally read off the circuit schedule, summed
//! over positions. The model covers the runner configuration: bench
//! profile, diagonal readout, and the seeded projection front end when
//! `projected` is set. Runs that exhaust their level budget stop
//! mid-schedule and are out of scope here; the level predictor covers where
//! they stop.

use crate::circuits::CircuitKind;
use crate::mock_ckks::LedgerSnapshot;

/// Predicted ledger counters for one completed run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PredictedOps {
    pub mul_ct_ct: u64,
    pub mul_ct_pt: u64,
    pub add: u64,
    pub rescale: u64,
    pub level_switch: u64,
    pub rotate: u64,
    pub encrypt_count: u64,
}

impl PredictedOps {
    /// Counter-by-counter comparison against an executed ledger. Returns one
    /// line per mismatch; empty means the model reproduced the run.
    pub fn diff(&self, ledger: &LedgerSnapshot) -> Vec<String> {
        let pairs = [
            ("mul_ct_ct", self.mul_ct_ct, ledger.mul_ct_ct),
            ("mul_ct_pt", self.mul_ct_pt, ledger.mul_ct_pt),
            ("add", self.add, ledger.add),
            ("rescale", self.rescale, ledger.rescale),
            ("level_switch", self.level_switch, ledger.level_switch),
            ("rotate", self.rotate, ledger.rotate),
            ("encrypt_count", self.encrypt_count, ledger.encrypt_count),
        ];
        pairs
            .iter()
            .filter(|(_, p, a)| p != a)
            .map(|(name, p, a)| format!("{name}: predicted {p}, ledger {a}"))
            .collect()
    }

    pub fn matches(&self, ledger: &LedgerSnapshot) -> bool {
        self.diff(ledger).is_empty()
    }
}

fn closed_counts(t: u64, k: u64, n: u64, projected: bool) -> PredictedOps {
    let proj = projected as u64;
    PredictedOps {
        mul_ct_ct: 2 * t,
        mul_ct_pt: t * (4 + k) + k + proj * n * t,
        add: 4 * t + k * (t - 1) + k + proj * n * t,
        rescale: 4 * t + k + proj * t,
        level_switch: 2 * t,
        rotate: proj * n * t,
        encrypt_count: t,
    }
}

fn streaming_counts(t: u64, n: u64, projected: bool) -> PredictedOps {
    let proj = projected as u64;
    PredictedOps {
        mul_ct_ct: 2 * t,
        mul_ct_pt: 5 * t + proj * n * t,
        add: 5 * t + proj * n * t,
        rescale: 4 * t - 1 + proj * t,
        level_switch: 3 * t,
        rotate: proj * n * t,
        encrypt_count: t + 1,
    }
}

fn naive_counts(t: u64, n: u64, projected: bool) -> PredictedOps {
    let proj = projected as u64;
    PredictedOps {
        mul_ct_ct: 4 * t,
        mul_ct_pt: 6 * t + proj * n * t,
        add: 7 * t + proj * n * t,
        rescale: 6 * t - 1 + proj * 2 * t,
        level_switch: 5 * t - 1,
        rotate: proj * n * t,
        encrypt_count: t + 1,
    }
}

fn attention_counts(t: u64, n: u64, projected: bool, full: bool) -> PredictedOps {
    let proj = projected as u64;
    let fullq = full as u64;
    let q = if full { t } else { 1 };
    let lg = n.trailing_zeros() as u64;
    PredictedOps {
        mul_ct_ct: q * (3 * t + 2),
        mul_ct_pt: q * (3 * t + 2) + fullq * q + 1 + proj * 4 * n * t,
        add: q * (t * (lg + 2) + 2 * t + 1) + fullq * (q - 1) + 1 + proj * 4 * n * t,
        rescale: q * (4 * t + 4) + fullq * q + 1 + proj * (3 * t + q),
        level_switch: q * (2 * t + 2),
        rotate: q * t * lg + proj * 4 * n * t,
        encrypt_count: t,
    }
}

/// Predicts the full operation ledger of `kind` run to completion over a
/// length-`t` sequence with `slot_count` slots.
pub fn op_count_model(
    kind: CircuitKind,
    t: usize,
    projected: bool,
    slot_count: usize,
) -> PredictedOps {
    assert!(t >= 1, "sequence length must be >= 1");
    let t = t as u64;
    let n = slot_count as u64;
    match kind {
        CircuitKind::HssmClosed => closed_counts(t, 1, n, projected),
        CircuitKind::HssmMulti => closed_counts(t, kind.track_count() as u64, n, projected),
        CircuitKind::HssmStreaming => streaming_counts(t, n, projected),
        CircuitKind::Naive => naive_counts(t, n, projected),
        CircuitKind::AttnFinal => attention_counts(t, n, projected, false),
        CircuitKind::AttnFull | CircuitKind::QuadAttn => attention_counts(t, n, projected, true),
    }
}
