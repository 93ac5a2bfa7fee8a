//! Uniform circuit runner for the trace and bench tooling: one kind string,
//! one seed, one profile in; a finished run plus its ledger out.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::mock_ckks::{Context, CtVector, LedgerSnapshot, SimParams};

use super::{
    attention_block, hssm_closed_form, hssm_streaming, multi_decay_hssm, naive_recurrence,
    AttnMode, AttnParams, AttnProjection, CircuitRun, GateWritePoly, HssmParams, NaiveParams,
    ProjectionMap, Readout,
};

/// Decay bank used by the multi-decay runner kind.
pub const SIX_DECAY_BANK: [f64; 6] = [0.1, 0.25, 0.5, 0.75, 0.9, 0.98];

const RUNNER_DECAY: f64 = 0.5;

/// The circuit families the tools know how to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CircuitKind {
    HssmClosed,
    HssmStreaming,
    HssmMulti,
    Naive,
    AttnFinal,
    AttnFull,
    /// Same execution as [`CircuitKind::AttnFull`]; reported against the
    /// quadratic logical-state and stress models instead of the pooled ones.
    QuadAttn,
}

impl CircuitKind {
    pub fn name(&self) -> &'static str {
        match self {
            CircuitKind::HssmClosed => "hssm-closed",
            CircuitKind::HssmStreaming => "hssm-streaming",
            CircuitKind::HssmMulti => "hssm-multi",
            CircuitKind::Naive => "naive",
            CircuitKind::AttnFinal => "final-token",
            CircuitKind::AttnFull => "full-seq",
            CircuitKind::QuadAttn => "quad-attn",
        }
    }

    pub fn parse(s: &str) -> Result<Self, SimError> {
        match s {
            "hssm-closed" | "hssm" => Ok(CircuitKind::HssmClosed),
            "hssm-streaming" | "streaming" => Ok(CircuitKind::HssmStreaming),
            "hssm-multi" | "multi-decay" => Ok(CircuitKind::HssmMulti),
            "naive" => Ok(CircuitKind::Naive),
            "final-token" | "attn-final" => Ok(CircuitKind::AttnFinal),
            "full-seq" | "attn-full" => Ok(CircuitKind::AttnFull),
            "quad-attn" => Ok(CircuitKind::QuadAttn),
            other => Err(SimError::InvalidParams(format!(
                "unknown circuit kind '{other}'"
            ))),
        }
    }

    pub fn all() -> [CircuitKind; 7] {
        [
            CircuitKind::HssmClosed,
            CircuitKind::HssmStreaming,
            CircuitKind::HssmMulti,
            CircuitKind::Naive,
            CircuitKind::AttnFinal,
            CircuitKind::AttnFull,
            CircuitKind::QuadAttn,
        ]
    }

    /// Track count for kinds that have one.
    pub fn track_count(&self) -> usize {
        match self {
            CircuitKind::HssmMulti => SIX_DECAY_BANK.len(),
            _ => 1,
        }
    }
}

/// One runner invocation: kind, sequence length, level budget, whether the
/// homomorphic projection front end is included, and the input seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunSpec {
    pub kind: CircuitKind,
    pub t: usize,
    pub depth: u32,
    pub projected: bool,
    pub seed: u64,
}

/// A finished run and the context ledger after cleanup. For completed runs
/// every ciphertext has been released, so `ledger.live_ciphertexts` is zero;
/// exhausted runs keep their abandoned intermediates on the ledger.
#[derive(Debug)]
pub struct KindRun {
    pub run: CircuitRun,
    pub ledger: LedgerSnapshot,
}

/// Deterministic input stream: `t` rows of `slot_count` values drawn
/// uniformly from [-0.9, 0.9].
pub fn seeded_inputs(t: usize, slot_count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..t)
        .map(|_| (0..slot_count).map(|_| rng.random_range(-0.9..=0.9)).collect())
        .collect()
}

fn runner_projection(seed: u64, width: usize) -> ProjectionMap {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let scale = 1.0 / (width as f64).sqrt();
    let diagonals = (0..width)
        .map(|_| {
            (0..width)
                .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal) * scale)
                .collect()
        })
        .collect();
    ProjectionMap {
        diagonals,
        bias: vec![0.0; width],
    }
}

fn runner_readout(width: usize) -> Readout {
    Readout::diagonal(vec![0.5; width], 0.25)
}

fn hssm_params(spec: &RunSpec, decays: Vec<f64>, width: usize) -> HssmParams {
    let mut p = HssmParams::bank(decays, GateWritePoly::default(), runner_readout(width));
    if p.decays.len() == 1 {
        p.bank_combine = vec![1.0];
    }
    if spec.projected {
        p = p.with_projection(runner_projection(spec.seed ^ 0x70726f6a, width));
    }
    p
}

fn attn_params(spec: &RunSpec, width: usize) -> AttnParams {
    let mut p = AttnParams::cached(spec.t as f64, Some(runner_readout(width)));
    if spec.projected {
        p = p.with_projection(AttnProjection {
            input: runner_projection(spec.seed ^ 0x696e7075, width),
            wq: runner_projection(spec.seed ^ 0x5771, width),
            wk: runner_projection(spec.seed ^ 0x576b, width),
            wv: runner_projection(spec.seed ^ 0x5776, width),
        });
    }
    p
}

/// Runs one kind under the bench profile (8 slots, scale 50, clip 3.0).
/// Inputs and, for completed runs, the output are released before the
/// ledger snapshot is taken.
pub fn run_kind(spec: &RunSpec) -> Result<KindRun, SimError> {
    if spec.t == 0 {
        return Err(SimError::InvalidParams("sequence length must be >= 1".into()));
    }
    let ctx = Context::new(SimParams::bench(spec.depth, spec.seed))?;
    let width = ctx.params().slot_count;
    let xs: Vec<CtVector> = seeded_inputs(spec.t, width, spec.seed)
        .iter()
        .map(|row| ctx.encrypt(row))
        .collect::<Result<_, _>>()?;
    let run = match spec.kind {
        CircuitKind::HssmClosed => {
            hssm_closed_form(&ctx, &xs, &hssm_params(spec, vec![RUNNER_DECAY], width))?
        }
        CircuitKind::HssmStreaming => {
            hssm_streaming(&ctx, &xs, &hssm_params(spec, vec![RUNNER_DECAY], width))?
        }
        CircuitKind::HssmMulti => {
            multi_decay_hssm(&ctx, &xs, &hssm_params(spec, SIX_DECAY_BANK.to_vec(), width))?
        }
        CircuitKind::Naive => {
            let mut p = NaiveParams::default();
            if spec.projected {
                p.projection = Some(runner_projection(spec.seed ^ 0x70726f6a, width));
            }
            naive_recurrence(&ctx, &xs, &p)?
        }
        CircuitKind::AttnFinal => {
            attention_block(&ctx, &xs, &attn_params(spec, width), AttnMode::FinalToken)?
        }
        CircuitKind::AttnFull | CircuitKind::QuadAttn => {
            attention_block(&ctx, &xs, &attn_params(spec, width), AttnMode::FullSequence)?
        }
    };
    for x in &xs {
        ctx.release(x)?;
    }
    if let Some(out) = &run.output {
        ctx.release(out)?;
    }
    Ok(KindRun {
        run,
        ledger: ctx.ledger(),
    })
}
