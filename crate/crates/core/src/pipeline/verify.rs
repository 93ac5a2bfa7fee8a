//! The exact plaintext/encrypted-match verifier.

use serde::Serialize;

use crate::exec::map_collect;
use crate::mock_ckks::{Context, LedgerSnapshot, SimParams};

use super::dataset::DatasetSplit;
use super::infer::{completed, decrypt_threshold, run_encrypted_inference};
use super::model::{fit_model, ModelKind, TrainedModel};
use super::projection::project_clip;
use super::text::{featurize, CHUNK_COUNT};
use super::vectors::Embeddings;
use super::PipelineError;

/// Decision boundary for both score paths.
pub const DECISION_THRESHOLD: f64 = 0.0;

pub const EXAMPLE_CSV_HEADER: &str =
    "index,label,plain_score,enc_score,score_delta,plain_decision,enc_decision,agree";

/// One validation example scored down both paths.
#[derive(Debug, Clone, PartialEq)]
pub struct ExampleRow {
    pub index: usize,
    pub label: u8,
    pub plain_score: f64,
    pub enc_score: f64,
    pub score_delta: f64,
    pub plain_decision: u8,
    pub enc_decision: u8,
    pub agree: bool,
}

impl ExampleRow {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.index,
            self.label,
            self.plain_score,
            self.enc_score,
            self.score_delta,
            self.plain_decision,
            self.enc_decision,
            self.agree
        )
    }
}

/// Aggregate verdict over a validation split.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchReport {
    pub dataset: String,
    pub model: String,
    pub n: usize,
    pub match_fraction: f64,
    pub max_score_delta: f64,
    pub ledger: LedgerSnapshot,
    pub final_level: Option<u32>,
    pub final_degree: Option<u8>,
}

type ScoredExample = (ExampleRow, LedgerSnapshot, Option<(u32, u8)>);

fn score_example(
    model: &TrainedModel,
    emb: &Embeddings,
    index: usize,
    label: u8,
    text: &str,
) -> Result<ScoredExample, PipelineError> {
    let chunks = project_clip(&featurize(text, emb, CHUNK_COUNT), &model.projection)?;
    let plain_score = model.plain_score(&chunks);
    let plain_decision = u8::from(plain_score >= DECISION_THRESHOLD);

    let ctx = Context::new(SimParams::pipeline(model.seed))?;
    let inf = run_encrypted_inference(&ctx, &chunks, model)?;
    let (enc_score, enc_decision, meta, agree) = if completed(&inf.run) {
        let ct = inf.run.output.as_ref().expect("completed run has a score");
        let r = decrypt_threshold(&ctx, ct, DECISION_THRESHOLD)?;
        let agree = r.label == plain_decision;
        (r.score, r.label, Some((r.level, r.degree)), agree)
    } else {
        (f64::NAN, 0, None, false)
    };
    let row = ExampleRow {
        index,
        label,
        plain_score,
        enc_score,
        score_delta: (enc_score - plain_score).abs(),
        plain_decision,
        enc_decision,
        agree,
    };
    Ok((row, ctx.ledger(), meta))
}

/// Replays every validation example through the plaintext reference and the
/// encrypted circuit and reports how often the decisions agree. Examples run
/// on independent contexts, so the fan-out is embarrassingly parallel; the
/// report merges the per-example ledgers by summation.
pub fn verify_exact_match(
    val: &DatasetSplit,
    emb: &Embeddings,
    model: &TrainedModel,
    parallel: bool,
) -> Result<(MatchReport, Vec<ExampleRow>), PipelineError> {
    let items: Vec<(usize, &(u8, String))> = val.rows.iter().enumerate().collect();
    let results = map_collect(&items, parallel, |(index, (label, text))| {
        score_example(model, emb, *index, *label, text)
    });

    let mut rows = Vec::with_capacity(results.len());
    let mut ledger = LedgerSnapshot::default();
    let mut final_meta: Option<(u32, u8)> = None;
    let mut max_delta = 0.0f64;
    let mut agreed = 0usize;
    for result in results {
        let (row, example_ledger, meta) = result?;
        ledger.merge(&example_ledger);
        if final_meta.is_none() {
            final_meta = meta;
        }
        if row.score_delta.is_finite() {
            max_delta = max_delta.max(row.score_delta);
        }
        agreed += usize::from(row.agree);
        rows.push(row);
    }
    let n = rows.len();
    let report = MatchReport {
        dataset: val.name.clone(),
        model: model.kind.name().to_string(),
        n,
        match_fraction: if n == 0 {
            1.0
        } else {
            agreed as f64 / n as f64
        },
        max_score_delta: max_delta,
        ledger,
        final_level: final_meta.map(|(l, _)| l),
        final_degree: final_meta.map(|(_, d)| d),
    };
    Ok((report, rows))
}

/// A fitted model plus its validation verdict.
#[derive(Debug)]
pub struct ClassifyOutcome {
    pub model: TrainedModel,
    pub report: MatchReport,
    pub rows: Vec<ExampleRow>,
}

/// The whole workflow: fit on the training split, verify on the validation
/// split.
pub fn run_classification(
    train: &DatasetSplit,
    val: &DatasetSplit,
    emb: &Embeddings,
    kind: ModelKind,
    lambda: f64,
    seed: u64,
    parallel: bool,
) -> Result<ClassifyOutcome, PipelineError> {
    let model = fit_model(train, emb, kind, lambda, seed)?;
    let (report, rows) = verify_exact_match(val, emb, &model, parallel)?;
    Ok(ClassifyOutcome {
        model,
        report,
        rows,
    })
}
