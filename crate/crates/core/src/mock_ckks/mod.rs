//! Leveled fixed-point ciphertext simulation with explicit cost ledgers.
//!
//! Ciphertexts here hold their data in the clear. What is simulated is the
//! bookkeeping an RNS-CKKS runtime does around the data: a level budget
//! consumed by rescales, a degree flag that records whether a ciphertext is
//! the un-rescaled output of a product, fixed-point quantization on the
//! 2^-scale_bits grid, and saturation at a clip bound. Every operation
//! updates a shared [`Ledger`], so circuits built on top can be costed and
//! cross-checked against closed-form operation-count models.
//!
//! Architecture:
//! - [`SimParams`] fixes a profile: depth budget, scale bits, slot count,
//!   clip bound, seed.
//! - [`Context`] owns the ledger and implements the operation set. All
//!   operations take `&self`, counters are atomic, and the live-handle set
//!   sits behind a mutex, so one context may be shared across threads or
//!   cloned per worker and merged by snapshot summation.
//! - [`CtVector`] is immutable. Operations return fresh ciphertexts and
//!   never mutate operands.
//!
//! Key design decisions:
//! - Rescale is lazy. Multiplication only accepts degree-1 operands, so a
//!   degree-2 operand is rescaled (one level, one ledger tick) at the moment
//!   it feeds the next multiplication rather than when it was produced.
//!   Products always come out at degree 2. This reproduces the level traces
//!   of a FLEXIBLEAUTO-style rescaling policy.
//! - Ciphertext-plaintext products raise the degree exactly like
//!   ciphertext-ciphertext products; only the ledger weight differs.
//! - Additions never rescale on their own. A degree mismatch normalizes the
//!   degree-2 operand first; a level mismatch drops the higher operand with
//!   a free level switch.
//! - Every operation output registers as a live ciphertext, and circuits
//!   release intermediates explicitly. `live_ciphertexts` and
//!   `peak_live_ciphertexts` therefore measure real residency, including
//!   the short-lived normalization copies inside compound operations.

mod context;
mod ledger;

pub use context::{Context, CtVector, Decrypted, PtVector};
pub use ledger::{
    Ledger, LedgerSnapshot, COST_ADD, COST_MUL_CT_CT, COST_MUL_CT_PT, COST_RESCALE, COST_ROTATE,
};

use crate::error::SimError;

/// Simulation profile. `depth_budget` is the level every fresh encryption
/// starts at; `scale_bits` sets the fixed-point grid; `clip_bound` is the
/// saturation limit applied after every operation.
#[derive(Debug, Clone, PartialEq)]
pub struct SimParams {
    pub depth_budget: u32,
    pub scale_bits: u32,
    pub slot_count: usize,
    pub clip_bound: f64,
    pub seed: u64,
}

impl SimParams {
    pub fn new(
        depth_budget: u32,
        scale_bits: u32,
        slot_count: usize,
        clip_bound: f64,
        seed: u64,
    ) -> Self {
        SimParams {
            depth_budget,
            scale_bits,
            slot_count,
            clip_bound,
            seed,
        }
    }

    /// Eight-slot profile used by the trace and bench runners.
    pub fn bench(depth_budget: u32, seed: u64) -> Self {
        SimParams::new(depth_budget, 50, 8, 3.0, seed)
    }

    /// 128-slot profile used by the text classification pipeline.
    pub fn pipeline(seed: u64) -> Self {
        SimParams::new(8, 50, 128, 3.0, seed)
    }

    pub(crate) fn validate(&self) -> Result<(), SimError> {
        if self.slot_count == 0 || !self.slot_count.is_power_of_two() {
            return Err(SimError::InvalidParams(format!(
                "slot_count must be a nonzero power of two, got {}",
                self.slot_count
            )));
        }
        if !(20..=60).contains(&self.scale_bits) {
            return Err(SimError::InvalidParams(format!(
                "scale_bits must lie in [20, 60], got {}",
                self.scale_bits
            )));
        }
        if !self.clip_bound.is_finite() || self.clip_bound <= 0.0 {
            return Err(SimError::InvalidParams(format!(
                "clip_bound must be positive and finite, got {}",
                self.clip_bound
            )));
        }
        Ok(())
    }
}
