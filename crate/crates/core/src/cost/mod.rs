//! Closed-form cost models for the circuit families.
//!
//! Everything in this module is computed without running a circuit: depth
//! recurrences, memory footprints, logical-state stress checks, a level
//! predictor that walks the stage schedule symbolically, and an itemized
//! operation-count model.
//!
//! Architecture:
//! - [`carry_depth_naive`] and [`carry_depth_hssm`] are the two depth
//!   recurrences the whole comparison rests on: one grows with sequence
//!   length, the other is a constant.
//! - [`predict_level_trace`] re-derives the per-stage (level, degree)
//!   schedule from the rescale rules alone; agreement tests hold it against
//!   executed traces stage label by stage label.
//! - [`op_count_model`] predicts the full ledger of a completed run.
//! - [`footprint`] and [`stress_check`] model ciphertext residency and the
//!   point where the quadratic families stop fitting a fixed budget.
//!
//! Key design decisions:
//! - The predictor shares no code with the simulator. It reimplements the
//!   metadata rules (normalize, multiply, add) on a bare (level, degree)
//!   pair, so a schedule bug in either side shows up as a disagreement
//!   instead of being reproduced twice.
//! - Count formulas are itemized per stage rather than fitted; when a test
//!   finds a mismatch the fix is re-deriving the term, never adjusting a
//!   constant.

mod counts;
mod predict;

pub use counts::{op_count_model, PredictedOps};
pub use predict::{predict_level_trace, PredictedOutcome, PredictedStage, PredictedTrace};

use serde::{Deserialize, Serialize};

use crate::circuits::CircuitKind;

/// Multiplicative depths feeding the carry recurrences: the gate polynomial,
/// the write branch, and the initial state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepthParams {
    pub d_g: u32,
    pub d_w: u32,
    pub d_h0: u32,
}

impl Default for DepthParams {
    fn default() -> Self {
        DepthParams {
            d_g: 2,
            d_w: 3,
            d_h0: 0,
        }
    }
}

/// Depth of the state after `t` steps of the recurrence with an encrypted
/// carry gate: each step multiplies the running state by a ciphertext, so
/// the state depth is
/// `d_h(t) = max(max(d_g, d_h(t-1)) + 1, d_w)` starting from `d_h0`.
pub fn carry_depth_naive(p: &DepthParams, t: usize) -> u32 {
    let mut d_h = p.d_h0;
    for _ in 0..t {
        d_h = (p.d_g.max(d_h) + 1).max(p.d_w);
    }
    d_h
}

/// Depth of the state after `t` steps when the carry is a public scalar:
/// plaintext products do not deepen the circuit, so the state never exceeds
/// the write branch.
pub fn carry_depth_hssm(p: &DepthParams, _t: usize) -> u32 {
    p.d_w
}

/// Per-family ciphertext residency as a function of sequence length, in
/// logical ciphertext units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FootprintReport {
    /// Recurrent state: one ciphertext regardless of length.
    pub state_units: u64,
    /// Cached per-position features: one per position.
    pub feature_cache_units: u64,
    /// Key/value cache: two per position.
    pub kv_cache_units: u64,
    /// Materialized pairwise scores: one per position pair.
    pub score_units: u64,
}

pub fn footprint(t: usize) -> FootprintReport {
    let t = t as u64;
    FootprintReport {
        state_units: 1,
        feature_cache_units: t,
        kv_cache_units: 2 * t,
        score_units: t * t,
    }
}

/// Logical state a circuit family must keep resident to process a length-`t`
/// sequence, in ciphertext units.
pub fn logical_state_units(kind: CircuitKind, t: usize) -> u64 {
    let t = t as u64;
    match kind {
        CircuitKind::HssmClosed | CircuitKind::HssmStreaming | CircuitKind::Naive => 1,
        CircuitKind::HssmMulti => kind.track_count() as u64,
        CircuitKind::AttnFinal => 2 * t + 1,
        CircuitKind::AttnFull => 3 * t,
        CircuitKind::QuadAttn => t * t,
    }
}

/// Residency margin for the per-position working set (scratch powers,
/// polynomial terms, the normalizer chain) on top of the logical state.
pub const WORKING_SET_MARGIN: u64 = 8;

/// Budget in logical ciphertext units. Pinned so the quadratic score set
/// crosses it between T = 32 (1032 + margin fits) and T = 36 (1296 + margin
/// does not), matching where the reference evaluator starts thrashing.
pub const CALIBRATED_BUDGET: u64 = 1100;

/// Outcome of holding a family's working set against a residency budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StressReport {
    pub logical_units: u64,
    pub required_units: u64,
    pub budget: u64,
    pub ok: bool,
}

pub fn stress_check(kind: CircuitKind, t: usize, budget: u64) -> StressReport {
    let logical_units = logical_state_units(kind, t);
    let required_units = logical_units + WORKING_SET_MARGIN;
    StressReport {
        logical_units,
        required_units,
        budget,
        ok: required_units <= budget,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn naive_carry_depth_grows_one_level_per_step() {
        let p = DepthParams::default();
        assert_eq!(carry_depth_naive(&p, 0), 0);
        assert_eq!(carry_depth_naive(&p, 1), 3);
        assert_eq!(carry_depth_naive(&p, 2), 4);
        assert_eq!(carry_depth_naive(&p, 8), 10);
        assert_eq!(carry_depth_naive(&p, 100), 102);
    }

    #[test]
    fn hssm_carry_depth_is_the_write_depth() {
        let p = DepthParams::default();
        for t in [0usize, 1, 8, 1000] {
            assert_eq!(carry_depth_hssm(&p, t), 3);
        }
        let deep = DepthParams {
            d_g: 5,
            d_w: 7,
            d_h0: 1,
        };
        assert_eq!(carry_depth_hssm(&deep, 64), 7);
        assert_eq!(carry_depth_naive(&deep, 64), 70);
    }

    #[test]
    fn footprint_scales_linearly_except_scores() {
        assert_eq!(
            footprint(3),
            FootprintReport {
                state_units: 1,
                feature_cache_units: 3,
                kv_cache_units: 6,
                score_units: 9,
            }
        );
        assert_eq!(footprint(36).score_units, 1296);
        assert_eq!(footprint(1066).score_units, 1_136_356);
        assert_eq!(footprint(1066).state_units, 1);
    }

    #[test]
    fn logical_state_table() {
        assert_eq!(logical_state_units(CircuitKind::HssmClosed, 500), 1);
        assert_eq!(logical_state_units(CircuitKind::HssmStreaming, 500), 1);
        assert_eq!(logical_state_units(CircuitKind::Naive, 500), 1);
        assert_eq!(logical_state_units(CircuitKind::HssmMulti, 500), 6);
        assert_eq!(logical_state_units(CircuitKind::AttnFinal, 10), 21);
        assert_eq!(logical_state_units(CircuitKind::AttnFull, 10), 30);
        assert_eq!(logical_state_units(CircuitKind::QuadAttn, 10), 100);
    }

    #[test]
    fn quadratic_family_crosses_the_budget_between_32_and_36() {
        let at_32 = stress_check(CircuitKind::QuadAttn, 32, CALIBRATED_BUDGET);
        assert_eq!(at_32.required_units, 1032);
        assert!(at_32.ok);
        let at_36 = stress_check(CircuitKind::QuadAttn, 36, CALIBRATED_BUDGET);
        assert_eq!(at_36.required_units, 1304);
        assert!(!at_36.ok);
    }

    #[test]
    fn recurrent_families_never_stress_the_budget() {
        for kind in [
            CircuitKind::HssmClosed,
            CircuitKind::HssmStreaming,
            CircuitKind::HssmMulti,
            CircuitKind::Naive,
        ] {
            let r = stress_check(kind, 1_000_000, CALIBRATED_BUDGET);
            assert!(r.ok, "kind {} required {}", kind.name(), r.required_units);
        }
        assert_eq!(
            stress_check(CircuitKind::HssmClosed, 64, CALIBRATED_BUDGET).required_units,
            9
        );
    }
}
