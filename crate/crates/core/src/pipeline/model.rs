//! Per-circuit training: plaintext forward passes, readout fitting, and
//! dynamic-range calibration.
//!
//! The plaintext helpers here are the reference path of the exact-match
//! verifier, so they follow the encrypted circuits operation for operation:
//! same coefficient grouping, same scalar factors, same summation shapes.

use crate::circuits::{
    AttnParams, CircuitKind, GateWritePoly, HssmParams, Poly2, Readout, KERNEL_POLY, RECIP_POLY,
    SIX_DECAY_BANK,
};
use crate::mock_ckks::SimParams;

use super::dataset::DatasetSplit;
use super::projection::{fit_projection, project_clip, ProjectionSpec};
use super::ridge::{fit_ridge, ReadoutModel};
use super::text::{featurize, CHUNK_COUNT};
use super::vectors::Embeddings;
use super::PipelineError;

/// Public decay for the single-track state circuit.
pub const PIPELINE_DECAY: f64 = 0.9;

/// Write-candidate quadratic. Shallower than the bench default so the
/// decay-weighted write sum stays inside the ciphertext dynamic range at
/// the pipeline's sequence length.
pub const PIPELINE_WRITE: Poly2 = Poly2::new(0.0, 0.6, 0.15);

pub const DEFAULT_LAMBDA: f64 = 1.0;

/// Fraction of the clip bound the scaled readout may use; the rest absorbs
/// validation examples that run hotter than anything in the training split.
pub const SCORE_HEADROOM: f64 = 0.75;

fn pipeline_poly() -> GateWritePoly {
    GateWritePoly {
        write: PIPELINE_WRITE,
        ..GateWritePoly::default()
    }
}

/// Circuits the classification workflow can evaluate under encryption.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Hssm,
    MultiDecay,
    AttnFinal,
    AttnFull,
}

impl ModelKind {
    pub fn all() -> [ModelKind; 4] {
        [
            ModelKind::Hssm,
            ModelKind::MultiDecay,
            ModelKind::AttnFinal,
            ModelKind::AttnFull,
        ]
    }

    pub fn from_circuit(kind: CircuitKind) -> Option<ModelKind> {
        match kind {
            CircuitKind::HssmClosed => Some(ModelKind::Hssm),
            CircuitKind::HssmMulti => Some(ModelKind::MultiDecay),
            CircuitKind::AttnFinal => Some(ModelKind::AttnFinal),
            CircuitKind::AttnFull => Some(ModelKind::AttnFull),
            _ => None,
        }
    }

    pub fn circuit_kind(self) -> CircuitKind {
        match self {
            ModelKind::Hssm => CircuitKind::HssmClosed,
            ModelKind::MultiDecay => CircuitKind::HssmMulti,
            ModelKind::AttnFinal => CircuitKind::AttnFinal,
            ModelKind::AttnFull => CircuitKind::AttnFull,
        }
    }

    pub fn name(self) -> &'static str {
        self.circuit_kind().name()
    }

    pub fn parse(s: &str) -> Result<ModelKind, PipelineError> {
        let kind = CircuitKind::parse(s).map_err(PipelineError::Sim)?;
        ModelKind::from_circuit(kind).ok_or_else(|| {
            PipelineError::Sim(crate::error::SimError::InvalidParams(format!(
                "classification runs hssm-closed, hssm-multi, final-token, or full-seq, not '{s}'"
            )))
        })
    }
}

/// Everything the client fits on the training split: projection, circuit
/// coefficients, readout, and the calibration constants. Immutable once
/// fitted; both score paths read from it.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub kind: ModelKind,
    pub projection: ProjectionSpec,
    pub poly: GateWritePoly,
    pub decays: Vec<f64>,
    pub bank_combine: Vec<f64>,
    /// Public constant the attention denominators are centered on; 1.0 for
    /// the state-space kinds, which never form a denominator.
    pub denom_center: f64,
    /// Readout with weights and bias already divided by `gamma`.
    pub readout: ReadoutModel,
    pub gamma: f64,
    pub seed: u64,
}

impl TrainedModel {
    pub fn hssm_params(&self) -> HssmParams {
        HssmParams {
            decays: self.decays.clone(),
            bank_combine: self.bank_combine.clone(),
            poly: self.poly,
            readout: Readout::dot_row(self.readout.weights.clone(), self.readout.bias),
            projection: None,
        }
    }

    pub fn attn_params(&self) -> AttnParams {
        AttnParams::cached(
            self.denom_center,
            Some(Readout::dot_row(
                self.readout.weights.clone(),
                self.readout.bias,
            )),
        )
    }

    /// Per-track final states for the state-space kinds.
    pub fn plain_state_bank(&self, chunks: &[Vec<f64>]) -> Vec<Vec<f64>> {
        plain_state_banks(chunks, &self.decays, &self.poly)
    }

    /// Reference score in plain arithmetic, mirroring the encrypted path.
    pub fn plain_score(&self, chunks: &[Vec<f64>]) -> f64 {
        match self.kind {
            ModelKind::Hssm | ModelKind::MultiDecay => {
                let banks = self.plain_state_bank(chunks);
                let width = chunks.first().map_or(0, Vec::len);
                let mut total = 0.0;
                for j in 0..width {
                    let mut slot = 0.0;
                    for (h, c) in banks.iter().zip(&self.bank_combine) {
                        slot += (self.readout.weights[j] * c) * h[j];
                    }
                    total += slot;
                }
                total + self.readout.bias
            }
            ModelKind::AttnFinal | ModelKind::AttnFull => {
                let pooled = plain_attention_pooled(
                    chunks,
                    self.denom_center,
                    self.kind == ModelKind::AttnFinal,
                );
                self.readout.predict(&pooled)
            }
        }
    }
}

fn plain_write(poly: &GateWritePoly, x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|&v| poly.gate.eval(v) * poly.write.eval(v))
        .collect()
}

/// Decay-weighted write sums, one state vector per track.
pub(crate) fn plain_state_banks(
    chunks: &[Vec<f64>],
    decays: &[f64],
    poly: &GateWritePoly,
) -> Vec<Vec<f64>> {
    let t_len = chunks.len();
    let width = chunks.first().map_or(0, Vec::len);
    let mut banks = vec![vec![0.0; width]; decays.len()];
    for (t, x) in chunks.iter().enumerate() {
        let w = plain_write(poly, x);
        for (bank, decay) in banks.iter_mut().zip(decays) {
            let gain = decay.powi((t_len - 1 - t) as i32);
            for (h, wv) in bank.iter_mut().zip(&w) {
                *h += wv * gain;
            }
        }
    }
    banks
}

/// Plain mirror of the attention circuit up to (not including) the readout.
/// Queries carry the 1/width scale the client folds into the q stream.
pub(crate) fn plain_attention_pooled(
    chunks: &[Vec<f64>],
    center: f64,
    final_only: bool,
) -> Vec<f64> {
    let t_len = chunks.len();
    let width = chunks.first().map_or(0, Vec::len);
    let q_scale = 1.0 / width as f64;
    let inv_center = 1.0 / center;
    let inv_t = 1.0 / t_len as f64;
    let queries: Vec<usize> = if final_only {
        vec![t_len - 1]
    } else {
        (0..t_len).collect()
    };
    let mut pooled = vec![0.0; width];
    for &i in &queries {
        let q: Vec<f64> = chunks[i].iter().map(|v| v * q_scale).collect();
        let kappas: Vec<f64> = (0..t_len)
            .map(|t| {
                let z: f64 = q.iter().zip(&chunks[t]).map(|(qv, kv)| qv * kv).sum();
                KERNEL_POLY.eval(z) * inv_center
            })
            .collect();
        let d: f64 = kappas.iter().sum();
        let rho = RECIP_POLY.eval(d - 1.0);
        for (j, slot) in pooled.iter_mut().enumerate() {
            let num: f64 = (0..t_len).map(|t| kappas[t] * chunks[t][j]).sum();
            let out = num * rho;
            *slot += if final_only { out } else { out * inv_t };
        }
    }
    pooled
}

/// Uncentered kernel-weight sums, one per query, for calibrating the
/// denominator center.
pub(crate) fn plain_raw_denominators(chunks: &[Vec<f64>], final_only: bool) -> Vec<f64> {
    let t_len = chunks.len();
    let width = chunks.first().map_or(0, Vec::len);
    let q_scale = 1.0 / width as f64;
    let queries: Vec<usize> = if final_only {
        vec![t_len - 1]
    } else {
        (0..t_len).collect()
    };
    queries
        .iter()
        .map(|&i| {
            let q: Vec<f64> = chunks[i].iter().map(|v| v * q_scale).collect();
            (0..t_len)
                .map(|t| {
                    let z: f64 = q.iter().zip(&chunks[t]).map(|(qv, kv)| qv * kv).sum();
                    KERNEL_POLY.eval(z)
                })
                .sum()
        })
        .collect()
}

fn combine_banks(banks: &[Vec<f64>], combine: &[f64]) -> Vec<f64> {
    let width = banks.first().map_or(0, Vec::len);
    let mut out = vec![0.0; width];
    for (bank, c) in banks.iter().zip(combine) {
        for (o, h) in out.iter_mut().zip(bank) {
            *o += c * h;
        }
    }
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Fits the full client-side model for one circuit kind: featurize, fit the
/// projection, run the plaintext forward pass, fit the readout, and scale
/// it into the ciphertext dynamic range.
pub fn fit_model(
    train: &DatasetSplit,
    emb: &Embeddings,
    kind: ModelKind,
    lambda: f64,
    seed: u64,
) -> Result<TrainedModel, PipelineError> {
    let profile = SimParams::pipeline(seed);
    let width = profile.slot_count;
    let raw: Vec<Vec<Vec<f64>>> = train
        .rows
        .iter()
        .map(|(_, text)| featurize(text, emb, CHUNK_COUNT))
        .collect();
    let flat: Vec<Vec<f64>> = raw.iter().flat_map(|ex| ex.iter().cloned()).collect();
    let projection = fit_projection(&flat, seed, width)?;
    let examples: Vec<Vec<Vec<f64>>> = raw
        .iter()
        .map(|ex| project_clip(ex, &projection))
        .collect::<Result<_, _>>()?;
    let labels: Vec<u8> = train.rows.iter().map(|(l, _)| *l).collect();
    let poly = pipeline_poly();

    let (decays, bank_combine, denom_center, stage_readout, l1_max);
    match kind {
        ModelKind::Hssm | ModelKind::MultiDecay => {
            decays = if kind == ModelKind::Hssm {
                vec![PIPELINE_DECAY]
            } else {
                SIX_DECAY_BANK.to_vec()
            };
            let banks: Vec<Vec<Vec<f64>>> = examples
                .iter()
                .map(|ex| plain_state_banks(ex, &decays, &poly))
                .collect();
            let uniform = vec![1.0 / decays.len() as f64; decays.len()];
            let phi: Vec<Vec<f64>> = banks.iter().map(|b| combine_banks(b, &uniform)).collect();
            let stage1 = fit_ridge(&phi, &labels, lambda)?;
            if kind == ModelKind::Hssm {
                bank_combine = vec![1.0];
                stage_readout = stage1;
            } else {
                let psi: Vec<Vec<f64>> = banks
                    .iter()
                    .map(|b| b.iter().map(|h| dot(&stage1.weights, h)).collect())
                    .collect();
                let stage2 = fit_ridge(&psi, &labels, lambda)?;
                bank_combine = stage2.weights;
                stage_readout = ReadoutModel {
                    weights: stage1.weights,
                    bias: stage2.bias,
                    lambda,
                };
            }
            denom_center = 1.0;
            l1_max = banks
                .iter()
                .map(|b| {
                    b.iter()
                        .zip(&bank_combine)
                        .map(|(h, c)| {
                            h.iter()
                                .zip(&stage_readout.weights)
                                .map(|(hj, wj)| (wj * c * hj).abs())
                                .sum::<f64>()
                        })
                        .sum::<f64>()
                })
                .fold(0.0, f64::max);
        }
        ModelKind::AttnFinal | ModelKind::AttnFull => {
            decays = vec![PIPELINE_DECAY];
            bank_combine = vec![1.0];
            let final_only = kind == ModelKind::AttnFinal;
            let mut denoms = Vec::new();
            for ex in &examples {
                denoms.extend(plain_raw_denominators(ex, final_only));
            }
            denom_center = denoms.iter().sum::<f64>() / denoms.len() as f64;
            let phi: Vec<Vec<f64>> = examples
                .iter()
                .map(|ex| plain_attention_pooled(ex, denom_center, final_only))
                .collect();
            stage_readout = fit_ridge(&phi, &labels, lambda)?;
            l1_max = phi
                .iter()
                .map(|p| {
                    p.iter()
                        .zip(&stage_readout.weights)
                        .map(|(pj, wj)| (wj * pj).abs())
                        .sum::<f64>()
                })
                .fold(0.0, f64::max);
        }
    }

    let gamma = (l1_max / (SCORE_HEADROOM * profile.clip_bound)).max(1.0);
    let inv = 1.0 / gamma;
    let readout = ReadoutModel {
        weights: stage_readout.weights.iter().map(|w| w * inv).collect(),
        bias: stage_readout.bias * inv,
        lambda,
    };
    Ok(TrainedModel {
        kind,
        projection,
        poly,
        decays,
        bank_combine,
        denom_center,
        readout,
        gamma,
        seed,
    })
}
