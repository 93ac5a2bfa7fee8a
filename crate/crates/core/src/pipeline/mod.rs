//! The bounded-feature text classification workflow.
//!
//! Everything the client does is plaintext: tokenize, look up embeddings,
//! average them into T = 4 chunk features, apply a seeded random projection
//! with train-split normalization, clip, and encrypt the 4 x 128 bounded
//! scalars. The server sees only ciphertexts and public parameters: it runs
//! one of the sequence circuits with a ridge readout folded into the
//! encrypted path and hands back a single score ciphertext. The client
//! decrypts and thresholds.
//!
//! Architecture:
//! - [`vectors`]: frozen word-vector tables plus a seeded hashed-embedding
//!   substitute so everything runs without external files.
//! - [`text`] / [`dataset`]: tokenization, chunked featurization, TSV
//!   ingestion, and the synthetic two-pool dataset generator.
//! - [`projection`] / [`ridge`]: train-normalized random projection with
//!   clipping, and the closed-form ridge solver for readouts.
//! - [`model`]: per-circuit training: plaintext forward passes, readout
//!   fitting, denominator calibration, and dynamic-range scaling.
//! - [`infer`] / [`verify`]: the encrypted evaluation itself and the
//!   verifier that replays every example down both paths and reports the
//!   match fraction and score deltas.
//!
//! Key design decisions:
//! - The plaintext reference path mirrors the encrypted circuit operation
//!   for operation (same coefficient grouping, same summation shapes), so
//!   the residual score delta measures quantization alone.
//! - Readout weights are rescaled once at fit time so every partial sum in
//!   the encrypted readout stays inside the ciphertext dynamic range;
//!   decisions are sign-based and unaffected.
//! - The verifier builds a fresh context per example, which makes examples
//!   independent, lets them fan out across threads, and keeps per-example
//!   ledgers honest; the report merges them by summation.

mod dataset;
mod infer;
mod model;
mod projection;
mod ridge;
mod text;
mod vectors;
mod verify;

pub use dataset::{load_dataset, synthetic_dataset, DatasetSplit, SYNTHETIC_TRAIN, SYNTHETIC_VAL};
pub use infer::{decrypt_threshold, run_encrypted_inference, InferenceRun, ScoreReadout};
pub use model::{
    fit_model, ModelKind, TrainedModel, DEFAULT_LAMBDA, PIPELINE_DECAY, PIPELINE_WRITE,
    SCORE_HEADROOM,
};
pub use projection::{fit_projection, project_clip, ProjectionSpec, FEATURE_CLIP, STD_FLOOR};
pub use ridge::{fit_ridge, ReadoutModel};
pub use text::{featurize, tokenize, CHUNK_COUNT};
pub use vectors::{load_vectors, Embeddings, VectorTable, HASHED_DIM};
pub use verify::{
    run_classification, verify_exact_match, ClassifyOutcome, ExampleRow, MatchReport,
    DECISION_THRESHOLD, EXAMPLE_CSV_HEADER,
};

use std::fmt;
use std::io;

use crate::error::SimError;

/// Failure modes of the classification workflow. Simulator errors pass
/// through unchanged; everything else is an ingestion or fitting problem.
#[derive(Debug)]
pub enum PipelineError {
    /// Malformed input file. `line` is 1-based; 0 means the file as a whole.
    Parse { line: usize, message: String },
    /// A row or vector with the wrong number of entries. `line` is 0 when
    /// the mismatch did not come from a file.
    DimensionMismatch {
        line: usize,
        expected: usize,
        got: usize,
    },
    /// Training features carry no usable variation.
    DegenerateTraining,
    /// The ridge system cannot be factored (non-positive regularizer).
    SingularSystem,
    Io(io::Error),
    Sim(SimError),
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PipelineError::Parse { line, message } => {
                if *line == 0 {
                    write!(f, "parse error: {message}")
                } else {
                    write!(f, "parse error at line {line}: {message}")
                }
            }
            PipelineError::DimensionMismatch {
                line,
                expected,
                got,
            } => {
                if *line == 0 {
                    write!(f, "dimension mismatch: expected {expected}, got {got}")
                } else {
                    write!(
                        f,
                        "dimension mismatch at line {line}: expected {expected}, got {got}"
                    )
                }
            }
            PipelineError::DegenerateTraining => {
                write!(f, "training features are all identical")
            }
            PipelineError::SingularSystem => {
                write!(f, "ridge system is singular: regularizer must be positive")
            }
            PipelineError::Io(e) => write!(f, "io error: {e}"),
            PipelineError::Sim(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for PipelineError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            PipelineError::Io(e) => Some(e),
            PipelineError::Sim(e) => Some(e),
            _ => None,
        }
    }
}

impl From<io::Error> for PipelineError {
    fn from(e: io::Error) -> Self {
        PipelineError::Io(e)
    }
}

impl From<SimError> for PipelineError {
    fn from(e: SimError) -> Self {
        PipelineError::Sim(e)
    }
}
