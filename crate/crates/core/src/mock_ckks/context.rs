//! The operation set: encrypt, release, arithmetic, rotations, rescale.

use std::collections::HashSet;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use crate::error::SimError;

use super::ledger::{Ledger, LedgerSnapshot};
use super::SimParams;

/// Immutable ciphertext handle. `level` is the remaining rescale budget and
/// `degree` is 1 for a rescaled (multiplication-ready) ciphertext or 2 for
/// the raw output of a product.
#[derive(Debug, Clone)]
pub struct CtVector {
    id: u64,
    level: u32,
    degree: u8,
    slots: Vec<f64>,
}

impl CtVector {
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn degree(&self) -> u8 {
        self.degree
    }

    pub fn slot_count(&self) -> usize {
        self.slots.len()
    }
}

/// Plaintext operand, already laid out slot by slot.
#[derive(Debug, Clone, PartialEq)]
pub struct PtVector {
    slots: Vec<f64>,
}

impl PtVector {
    pub fn new(slots: Vec<f64>) -> Self {
        PtVector { slots }
    }

    pub fn splat(value: f64, slot_count: usize) -> Self {
        PtVector {
            slots: vec![value; slot_count],
        }
    }

    pub fn slots(&self) -> &[f64] {
        &self.slots
    }
}

/// Result of a decrypt call: slot values plus the metadata they carried.
#[derive(Debug, Clone, PartialEq)]
pub struct Decrypted {
    pub slots: Vec<f64>,
    pub level: u32,
    pub degree: u8,
}

/// Shared simulator state: parameters, ledger, and the set of live handles.
pub struct Context {
    params: SimParams,
    grid: f64,
    bound: f64,
    ledger: Ledger,
    next_id: AtomicU64,
    live: Mutex<HashSet<u64>>,
}

impl Context {
    pub fn new(params: SimParams) -> Result<Self, SimError> {
        params.validate()?;
        let grid = (params.scale_bits as f64).exp2();
        // The operational bound is the clip bound snapped to the grid, so a
        // clamped slot lands on a representable value.
        let bound = (params.clip_bound * grid).round_ties_even() / grid;
        Ok(Context {
            params,
            grid,
            bound,
            ledger: Ledger::default(),
            next_id: AtomicU64::new(1),
            live: Mutex::new(HashSet::new()),
        })
    }

    pub fn params(&self) -> &SimParams {
        &self.params
    }

    /// Clip bound snapped to the quantization grid; clamped slots take this
    /// value exactly.
    pub fn snapped_clip_bound(&self) -> f64 {
        self.bound
    }

    pub fn ledger(&self) -> LedgerSnapshot {
        self.ledger.snapshot()
    }

    fn register(&self, level: u32, degree: u8, slots: Vec<f64>) -> CtVector {
        let id = self.next_id.fetch_add(1, Ordering::Relaxed);
        self.live.lock().unwrap().insert(id);
        self.ledger.track_alloc();
        CtVector {
            id,
            level,
            degree,
            slots,
        }
    }

    /// Quantizes, clamps, and registers an operation result.
    fn finish(&self, raw: impl Iterator<Item = f64>, level: u32, degree: u8) -> CtVector {
        let mut clipped = 0u64;
        let slots: Vec<f64> = raw
            .map(|v| {
                let q = (v * self.grid).round_ties_even() / self.grid;
                if q > self.bound {
                    clipped += 1;
                    self.bound
                } else if q < -self.bound {
                    clipped += 1;
                    -self.bound
                } else {
                    q
                }
            })
            .collect();
        self.ledger.add_clip_events(clipped);
        self.register(level, degree, slots)
    }

    fn expect_slot_count(&self, len: usize) -> Result<(), SimError> {
        if len != self.params.slot_count {
            return Err(SimError::ShapeMismatch {
                expected: self.params.slot_count,
                got: len,
            });
        }
        Ok(())
    }

    /// Encrypts a full slot vector at the top level, degree 1. Values are
    /// checked against the clip bound before quantization; encryption never
    /// silently clips.
    pub fn encrypt(&self, values: &[f64]) -> Result<CtVector, SimError> {
        self.expect_slot_count(values.len())?;
        for (slot, &value) in values.iter().enumerate() {
            if !value.is_finite() || value.abs() > self.params.clip_bound {
                return Err(SimError::RangeViolation {
                    slot,
                    value,
                    bound: self.params.clip_bound,
                });
            }
        }
        self.ledger.bump_encrypt();
        Ok(self.finish(values.iter().copied(), self.params.depth_budget, 1))
    }

    pub fn decrypt(&self, ct: &CtVector) -> Decrypted {
        self.ledger.bump_decrypt();
        Decrypted {
            slots: ct.slots.clone(),
            level: ct.level,
            degree: ct.degree,
        }
    }

    /// Drops a live handle. Releasing the same handle twice is an error so
    /// circuits cannot double-count freed residency.
    pub fn release(&self, ct: &CtVector) -> Result<(), SimError> {
        let mut live = self.live.lock().unwrap();
        if !live.remove(&ct.id) {
            return Err(SimError::DoubleRelease { id: ct.id });
        }
        self.ledger.track_release();
        Ok(())
    }

    /// Makes a ciphertext multiplication-ready. Degree 2 costs one rescale
    /// and one level; degree 1 is returned as a plain copy with no rescale
    /// tick. The returned handle is a fresh live ciphertext either way, and
    /// the caller owns its release.
    pub fn normalize_for_mult(&self, ct: &CtVector) -> Result<CtVector, SimError> {
        match ct.degree {
            1 => Ok(self.register(ct.level, 1, ct.slots.clone())),
            _ => {
                if ct.level == 0 {
                    return Err(SimError::LevelExhausted);
                }
                self.ledger.bump_rescale();
                Ok(self.finish(ct.slots.iter().copied(), ct.level - 1, 1))
            }
        }
    }

    /// Ciphertext-ciphertext product. Both operands are normalized to
    /// degree 1, the higher one is switched down to the common level, and
    /// the product comes out at that level with degree 2.
    pub fn mul_cc(&self, a: &CtVector, b: &CtVector) -> Result<CtVector, SimError> {
        if a.slots.len() != b.slots.len() {
            return Err(SimError::ShapeMismatch {
                expected: a.slots.len(),
                got: b.slots.len(),
            });
        }
        let an = self.normalize_for_mult(a)?;
        let bn = match self.normalize_for_mult(b) {
            Ok(v) => v,
            Err(e) => {
                self.release(&an)?;
                return Err(e);
            }
        };
        let level = an.level.min(bn.level);
        if an.level != level {
            self.ledger.bump_level_switch();
        }
        if bn.level != level {
            self.ledger.bump_level_switch();
        }
        let out = self.finish(
            an.slots.iter().zip(&bn.slots).map(|(x, y)| x * y),
            level,
            2,
        );
        self.ledger.bump_mul_ct_ct();
        self.release(&an)?;
        self.release(&bn)?;
        Ok(out)
    }

    /// Ciphertext-plaintext product. The ciphertext is normalized to
    /// degree 1 first; the result sits at its level with degree 2.
    pub fn mul_cp(&self, ct: &CtVector, pt: &PtVector) -> Result<CtVector, SimError> {
        self.expect_slot_count(pt.slots.len())?;
        if ct.slots.len() != pt.slots.len() {
            return Err(SimError::ShapeMismatch {
                expected: ct.slots.len(),
                got: pt.slots.len(),
            });
        }
        let n = self.normalize_for_mult(ct)?;
        let out = self.finish(n.slots.iter().zip(&pt.slots).map(|(x, y)| x * y), n.level, 2);
        self.ledger.bump_mul_ct_pt();
        self.release(&n)?;
        Ok(out)
    }

    /// Ciphertext-ciphertext sum. Mismatched degrees normalize the degree-2
    /// operand (one rescale); mismatched levels switch the higher operand
    /// down for free.
    pub fn add_cc(&self, a: &CtVector, b: &CtVector) -> Result<CtVector, SimError> {
        if a.slots.len() != b.slots.len() {
            return Err(SimError::ShapeMismatch {
                expected: a.slots.len(),
                got: b.slots.len(),
            });
        }
        let mut norm_tmp: Option<CtVector> = None;
        let (aa, bb): (&CtVector, &CtVector) = if a.degree == 2 && b.degree == 1 {
            norm_tmp = Some(self.normalize_for_mult(a)?);
            (norm_tmp.as_ref().unwrap(), b)
        } else if a.degree == 1 && b.degree == 2 {
            norm_tmp = Some(self.normalize_for_mult(b)?);
            (a, norm_tmp.as_ref().unwrap())
        } else {
            (a, b)
        };
        let level = aa.level.min(bb.level);
        if aa.level != level {
            self.ledger.bump_level_switch();
        }
        if bb.level != level {
            self.ledger.bump_level_switch();
        }
        let degree = aa.degree;
        let out = self.finish(
            aa.slots.iter().zip(&bb.slots).map(|(x, y)| x + y),
            level,
            degree,
        );
        self.ledger.bump_add();
        if let Some(tmp) = norm_tmp {
            self.release(&tmp)?;
        }
        Ok(out)
    }

    /// Ciphertext-plaintext sum: free of rescales and switches, metadata
    /// passes through.
    pub fn add_cp(&self, ct: &CtVector, pt: &PtVector) -> Result<CtVector, SimError> {
        if ct.slots.len() != pt.slots.len() {
            return Err(SimError::ShapeMismatch {
                expected: ct.slots.len(),
                got: pt.slots.len(),
            });
        }
        let out = self.finish(
            ct.slots.iter().zip(&pt.slots).map(|(x, y)| x + y),
            ct.level,
            ct.degree,
        );
        self.ledger.bump_add();
        Ok(out)
    }

    /// Cyclic left rotation: slot i of the result is slot (i + k) mod n of
    /// the input. Metadata passes through unchanged.
    pub fn rotate_slots(&self, ct: &CtVector, k: usize) -> Result<CtVector, SimError> {
        let n = ct.slots.len();
        if k >= n {
            return Err(SimError::ShapeMismatch {
                expected: n,
                got: k,
            });
        }
        self.ledger.bump_rotate();
        let out = self.finish((0..n).map(|i| ct.slots[(i + k) % n]), ct.level, ct.degree);
        Ok(out)
    }

    /// Replicated total of all slots via the rotate-and-add ladder:
    /// log2(slot_count) rotations and additions, metadata unchanged.
    pub fn slot_sum(&self, ct: &CtVector) -> Result<CtVector, SimError> {
        let n = self.params.slot_count;
        self.expect_slot_count(ct.slots.len())?;
        if n == 1 {
            return Ok(self.register(ct.level, ct.degree, ct.slots.clone()));
        }
        let mut acc: Option<CtVector> = None;
        let mut shift = 1usize;
        while shift < n {
            let src = acc.as_ref().unwrap_or(ct);
            let rot = self.rotate_slots(src, shift)?;
            let next = self.add_cc(src, &rot)?;
            self.release(&rot)?;
            if let Some(prev) = acc.take() {
                self.release(&prev)?;
            }
            acc = Some(next);
            shift <<= 1;
        }
        Ok(acc.expect("slot_count > 1 always yields an accumulator"))
    }
}
