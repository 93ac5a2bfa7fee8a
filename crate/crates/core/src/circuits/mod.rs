//! The competing sequence circuits.
//!
//! Four ways to move information along a token stream under encryption:
//!
//! - [`hssm_closed_form`]: gated state-space step with a public scalar
//!   decay, evaluated in closed form. Per position the data-dependent work
//!   is one shared square and one gate-times-candidate product; the decay
//!   weighting is plaintext, and positions combine in a balanced tree, so
//!   multiplicative depth does not grow with sequence length.
//! - [`multi_decay_hssm`]: the same step fanned out over a bank of decays;
//!   tracks share every ciphertext product and recombine inside the readout
//!   weights.
//! - [`hssm_streaming`]: the recurrence evaluated step by step against a
//!   running encrypted state. The plaintext carry still costs a rescale per
//!   step, so the level budget bounds how many steps can run.
//! - [`naive_recurrence`]: the unoptimized gated recurrence whose carry gate
//!   is itself a ciphertext, making state updates ct-ct products with depth
//!   that grows linearly in sequence length.
//! - [`poly_attention`]: quadratic-kernel attention with a polynomial
//!   reciprocal for the normalizer; cached Q/K/V or homomorphic input and
//!   Q/K/V projections via [`attention_block`].
//!
//! Key design decisions:
//! - Values that feed several multiplications are normalized once up front
//!   (the shared square, the write before decay scaling, all Q/K/V copies),
//!   which keeps rescale counts schedule-determined rather than
//!   value-determined.
//! - Polynomial stages always emit both coefficient products, even for zero
//!   coefficients, so every run of a given shape has the same trace.
//! - Stage labels are stable strings ("gate_write[3]", "score[7][2]"); the
//!   closed-form level predictor in [`crate::cost`] reproduces them exactly
//!   and the agreement tests compare full label sequences, not just
//!   endpoints.

mod attention;
mod blocks;
mod hssm;
mod naive;
mod runner;
mod trace;

pub use attention::{
    attention_block, poly_attention, qkv_project, QkvStreams, KERNEL_POLY, RECIP_POLY,
};
pub use blocks::{eval_gate_write, hssm_local_write, input_projection, readout_apply};
pub use hssm::{hssm_closed_form, hssm_streaming, multi_decay_hssm};
pub use naive::naive_recurrence;
pub use runner::{run_kind, seeded_inputs, CircuitKind, KindRun, RunSpec, SIX_DECAY_BANK};
pub use trace::{CircuitRun, RunStatus, StepTrace, TraceRow};

use serde::{Deserialize, Serialize};

use crate::error::SimError;

/// Quadratic with scalar coefficients: `c0 + c1 x + c2 x^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Poly2 {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Poly2 {
    pub const fn new(c0: f64, c1: f64, c2: f64) -> Self {
        Poly2 { c0, c1, c2 }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.c0 + self.c1 * x + self.c2 * x * x
    }
}

/// Gate and write-candidate quadratics sharing one squared input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateWritePoly {
    pub gate: Poly2,
    pub write: Poly2,
}

impl Default for GateWritePoly {
    fn default() -> Self {
        GateWritePoly {
            gate: Poly2::new(0.5, 0.25, 0.125),
            write: Poly2::new(0.0, 1.0, 0.25),
        }
    }
}

/// Public linear map stored by generalized diagonals, the layout rotation
/// matvec wants: `y[i] = sum_k diagonals[k][i] * x[(i+k) mod n] + bias[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionMap {
    pub diagonals: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

impl ProjectionMap {
    pub fn identity(width: usize) -> Self {
        let mut diagonals = vec![vec![0.0; width]; width];
        diagonals[0] = vec![1.0; width];
        ProjectionMap {
            diagonals,
            bias: vec![0.0; width],
        }
    }

    pub fn scaled_identity(width: usize, scale: f64) -> Self {
        let mut map = ProjectionMap::identity(width);
        map.diagonals[0] = vec![scale; width];
        map
    }

    /// Repacks a dense row-major matrix into diagonal form.
    pub fn from_matrix(rows: &[Vec<f64>]) -> Result<Self, SimError> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(SimError::InvalidParams(
                "projection matrix must be square and nonempty".into(),
            ));
        }
        let mut diagonals = vec![vec![0.0; n]; n];
        for (k, diag) in diagonals.iter_mut().enumerate() {
            for (i, slot) in diag.iter_mut().enumerate() {
                *slot = rows[i][(i + k) % n];
            }
        }
        Ok(ProjectionMap {
            diagonals,
            bias: vec![0.0; n],
        })
    }

    /// Plaintext mirror of [`input_projection`], used by reference scoring
    /// and the oracle tests.
    pub fn apply_plain(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|i| {
                let mut acc = self.bias[i];
                for (k, diag) in self.diagonals.iter().enumerate() {
                    acc += diag[i] * x[(i + k) % n];
                }
                acc
            })
            .collect()
    }

    pub fn width(&self) -> usize {
        self.diagonals.len()
    }

    pub(crate) fn validate(&self, slot_count: usize) -> Result<(), SimError> {
        if self.diagonals.len() != slot_count
            || self.diagonals.iter().any(|d| d.len() != slot_count)
            || self.bias.len() != slot_count
        {
            return Err(SimError::InvalidParams(format!(
                "projection width must match slot count {slot_count}"
            )));
        }
        Ok(())
    }
}

/// Final linear readout. `dot: false` is the elementwise (diagonal) form;
/// `dot: true` folds the weighted state with a slot sum into a replicated
/// scalar score. Both cost exactly one multiplication stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Readout {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub dot: bool,
}

impl Readout {
    pub fn diagonal(weights: Vec<f64>, bias: f64) -> Self {
        Readout {
            weights,
            bias,
            dot: false,
        }
    }

    pub fn dot_row(weights: Vec<f64>, bias: f64) -> Self {
        Readout {
            weights,
            bias,
            dot: true,
        }
    }

    /// Plaintext mirror of [`readout_apply`].
    pub fn apply_plain(&self, h: &[f64]) -> Vec<f64> {
        if self.dot {
            let s: f64 = self.weights.iter().zip(h).map(|(w, v)| w * v).sum();
            vec![s + self.bias; h.len()]
        } else {
            self.weights
                .iter()
                .zip(h)
                .map(|(w, v)| w * v + self.bias)
                .collect()
        }
    }

    pub(crate) fn validate(&self, slot_count: usize) -> Result<(), SimError> {
        if self.weights.len() != slot_count {
            return Err(SimError::InvalidParams(format!(
                "readout width {} does not match slot count {slot_count}",
                self.weights.len()
            )));
        }
        Ok(())
    }
}

/// State-space circuit configuration. `decays` and `bank_combine` have one
/// entry per track; the closed form folds `bank_combine[k]` into the readout
/// weights so track recombination costs no extra multiplication stage.
#[derive(Debug, Clone, PartialEq)]
pub struct HssmParams {
    pub decays: Vec<f64>,
    pub bank_combine: Vec<f64>,
    pub poly: GateWritePoly,
    pub readout: Readout,
    pub projection: Option<ProjectionMap>,
}

impl HssmParams {
    pub fn single(decay: f64, poly: GateWritePoly, readout: Readout) -> Self {
        HssmParams {
            decays: vec![decay],
            bank_combine: vec![1.0],
            poly,
            readout,
            projection: None,
        }
    }

    pub fn bank(decays: Vec<f64>, poly: GateWritePoly, readout: Readout) -> Self {
        let k = decays.len();
        HssmParams {
            decays,
            bank_combine: vec![1.0 / k as f64; k.max(1)],
            poly,
            readout,
            projection: None,
        }
    }

    pub fn with_projection(mut self, map: ProjectionMap) -> Self {
        self.projection = Some(map);
        self
    }

    pub(crate) fn validate(&self, slot_count: usize) -> Result<(), SimError> {
        if self.decays.is_empty() {
            return Err(SimError::InvalidParams("decay bank is empty".into()));
        }
        if self.bank_combine.len() != self.decays.len() {
            return Err(SimError::InvalidParams(format!(
                "bank_combine has {} entries for {} decays",
                self.bank_combine.len(),
                self.decays.len()
            )));
        }
        for &a in &self.decays {
            if !(a > 0.0 && a <= 1.0) {
                return Err(SimError::InvalidParams(format!(
                    "decay {a} outside (0, 1]"
                )));
            }
        }
        self.readout.validate(slot_count)?;
        if let Some(map) = &self.projection {
            map.validate(slot_count)?;
        }
        Ok(())
    }
}

/// Unoptimized recurrence configuration: the carry gate is evaluated from
/// its own square, the input gate and write candidate share one.
#[derive(Debug, Clone, PartialEq)]
pub struct NaiveParams {
    pub carry_gate: Poly2,
    pub input_gate: Poly2,
    pub write: Poly2,
    pub projection: Option<ProjectionMap>,
}

impl Default for NaiveParams {
    fn default() -> Self {
        let gw = GateWritePoly::default();
        NaiveParams {
            carry_gate: gw.gate,
            input_gate: gw.gate,
            write: gw.write,
            projection: None,
        }
    }
}

impl NaiveParams {
    pub(crate) fn validate(&self, slot_count: usize) -> Result<(), SimError> {
        if let Some(map) = &self.projection {
            map.validate(slot_count)?;
        }
        Ok(())
    }
}

/// Which attention outputs are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AttnMode {
    /// Attend only from the last position.
    FinalToken,
    /// Attend from every position and mean-pool the outputs. All kernel
    /// weights materialize before any normalizer completes, which is what
    /// makes the score footprint quadratic.
    FullSequence,
}

/// Homomorphic input and Q/K/V projections for the projected variant.
#[derive(Debug, Clone, PartialEq)]
pub struct AttnProjection {
    pub input: ProjectionMap,
    pub wq: ProjectionMap,
    pub wk: ProjectionMap,
    pub wv: ProjectionMap,
}

/// Attention configuration. The kernel and reciprocal coefficients are
/// fixed ([`KERNEL_POLY`], [`RECIP_POLY`]); `denom_center` is the public
/// calibration constant the denominator is centered on, folded into each
/// kernel weight as 1/center before summation.
#[derive(Debug, Clone, PartialEq)]
pub struct AttnParams {
    pub denom_center: f64,
    pub readout: Option<Readout>,
    pub projection: Option<AttnProjection>,
}

impl AttnParams {
    pub fn cached(denom_center: f64, readout: Option<Readout>) -> Self {
        AttnParams {
            denom_center,
            readout,
            projection: None,
        }
    }

    pub fn with_projection(mut self, projection: AttnProjection) -> Self {
        self.projection = Some(projection);
        self
    }

    pub(crate) fn validate(&self, slot_count: usize) -> Result<(), SimError> {
        if !self.denom_center.is_finite() || self.denom_center <= 0.0 {
            return Err(SimError::InvalidParams(format!(
                "denominator center must be positive, got {}",
                self.denom_center
            )));
        }
        if let Some(r) = &self.readout {
            r.validate(slot_count)?;
        }
        if let Some(p) = &self.projection {
            p.input.validate(slot_count)?;
            p.wq.validate(slot_count)?;
            p.wk.validate(slot_count)?;
            p.wv.validate(slot_count)?;
        }
        Ok(())
    }
}
