//! Encrypted evaluation: the client/server boundary.
//!
//! The client encrypts the bounded chunk features (plus the pre-scaled
//! query stream for the attention kinds) and later decrypts one score
//! ciphertext. Everything in between goes through [`server_evaluate`],
//! which touches only ciphertexts and public parameters.

use crate::circuits::{
    hssm_closed_form, multi_decay_hssm, poly_attention, AttnMode, CircuitRun, RunStatus,
};
use crate::error::SimError;
use crate::mock_ckks::{Context, CtVector, LedgerSnapshot};

use super::model::{ModelKind, TrainedModel};
use super::PipelineError;

/// One example's encrypted evaluation: the circuit run (score ciphertext
/// still live in `run.output` for completed runs) and the context ledger as
/// of the server handing the score back.
#[derive(Debug)]
pub struct InferenceRun {
    pub run: CircuitRun,
    pub ledger: LedgerSnapshot,
}

/// The server-side segment: selected circuit over the encrypted inputs,
/// readout folded in. Consumes no plaintext features and never encrypts or
/// decrypts.
fn server_evaluate(
    ctx: &Context,
    xs: &[CtVector],
    qs: Option<&[CtVector]>,
    model: &TrainedModel,
) -> Result<CircuitRun, SimError> {
    match model.kind {
        ModelKind::Hssm => hssm_closed_form(ctx, xs, &model.hssm_params()),
        ModelKind::MultiDecay => multi_decay_hssm(ctx, xs, &model.hssm_params()),
        ModelKind::AttnFinal | ModelKind::AttnFull => {
            let qs = qs.expect("attention kinds carry a query stream");
            let mode = if model.kind == ModelKind::AttnFinal {
                AttnMode::FinalToken
            } else {
                AttnMode::FullSequence
            };
            poly_attention(ctx, qs, xs, xs, &model.attn_params(), mode)
        }
    }
}

/// Encrypts one example's chunks and evaluates the model's circuit over
/// them. A level-exhausted circuit comes back as a reported status inside
/// the run, not an error.
pub fn run_encrypted_inference(
    ctx: &Context,
    chunks: &[Vec<f64>],
    model: &TrainedModel,
) -> Result<InferenceRun, PipelineError> {
    let n = ctx.params().slot_count;
    if chunks.is_empty() {
        return Err(PipelineError::Sim(SimError::InvalidParams(
            "at least one chunk is required".into(),
        )));
    }
    for chunk in chunks {
        if chunk.len() != n {
            return Err(PipelineError::Sim(SimError::ShapeMismatch {
                expected: n,
                got: chunk.len(),
            }));
        }
    }
    let xs: Vec<CtVector> = chunks
        .iter()
        .map(|c| ctx.encrypt(c))
        .collect::<Result<_, _>>()?;
    let qs: Option<Vec<CtVector>> = match model.kind {
        ModelKind::AttnFinal | ModelKind::AttnFull => {
            let q_scale = 1.0 / n as f64;
            Some(
                chunks
                    .iter()
                    .map(|c| {
                        let scaled: Vec<f64> = c.iter().map(|v| v * q_scale).collect();
                        ctx.encrypt(&scaled)
                    })
                    .collect::<Result<_, _>>()?,
            )
        }
        _ => None,
    };
    let run = server_evaluate(ctx, &xs, qs.as_deref(), model)?;
    for ct in xs.iter().chain(qs.iter().flatten()) {
        ctx.release(ct)?;
    }
    Ok(InferenceRun {
        ledger: ctx.ledger(),
        run,
    })
}

/// Decrypted score with the decision and the metadata the score carried.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreReadout {
    pub score: f64,
    pub label: u8,
    pub level: u32,
    pub degree: u8,
}

/// Client exit: decrypt the score ciphertext, release it, and threshold
/// the designated slot (slot 0; the dot readout replicates the score).
/// Ties go to label 1.
pub fn decrypt_threshold(
    ctx: &Context,
    score: &CtVector,
    threshold: f64,
) -> Result<ScoreReadout, PipelineError> {
    let d = ctx.decrypt(score);
    ctx.release(score)?;
    let value = d.slots[0];
    Ok(ScoreReadout {
        score: value,
        label: u8::from(value >= threshold),
        level: d.level,
        degree: d.degree,
    })
}

/// True when the run completed and its score is available.
pub fn completed(run: &CircuitRun) -> bool {
    matches!(run.status, RunStatus::Completed { .. }) && run.output.is_some()
}
