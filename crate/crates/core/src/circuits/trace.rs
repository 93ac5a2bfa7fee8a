//! Per-stage execution traces and the circuit outcome type.
//!
//! Circuits record one row per named stage: the stage label, the output
//! ciphertext's (level, degree), and the ledger delta accumulated since the
//! previous row. Level exhaustion inside a stage is not an error at the
//! circuit boundary; it becomes a [`RunStatus::LevelExhausted`] outcome that
//! names the failing stage, with the trace holding every stage that
//! completed before it.

use crate::error::SimError;
use crate::mock_ckks::{Context, CtVector, LedgerSnapshot};

/// One completed stage.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub op: String,
    pub level: u32,
    pub degree: u8,
    pub delta: LedgerSnapshot,
}

/// Ordered stage rows for one circuit run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepTrace {
    pub rows: Vec<TraceRow>,
}

impl StepTrace {
    /// Metadata of the last completed stage, which for a completed run is
    /// the circuit output's metadata.
    pub fn final_meta(&self) -> Option<(u32, u8)> {
        self.rows.last().map(|r| (r.level, r.degree))
    }
}

/// How a circuit run ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunStatus {
    Completed { level: u32, degree: u8 },
    /// `step` is the 0-based input position active when the budget ran out;
    /// terminal stages (aggregate, readout, pool) report the last position.
    LevelExhausted { step: usize, stage: String },
}

impl RunStatus {
    pub fn is_completed(&self) -> bool {
        matches!(self, RunStatus::Completed { .. })
    }
}

/// Circuit outcome: the output ciphertext when the run completed, the
/// status either way, and the stage trace.
#[derive(Debug)]
pub struct CircuitRun {
    pub output: Option<CtVector>,
    pub status: RunStatus,
    pub trace: StepTrace,
}

/// Ledger-diffing trace recorder.
pub(crate) struct Recorder<'c> {
    ctx: &'c Context,
    last: LedgerSnapshot,
    rows: Vec<TraceRow>,
}

impl<'c> Recorder<'c> {
    pub fn new(ctx: &'c Context) -> Self {
        Recorder {
            ctx,
            last: ctx.ledger(),
            rows: Vec::new(),
        }
    }

    /// Closes the current stage: metadata from `out`, ledger delta since the
    /// previous row.
    pub fn stage(&mut self, label: &str, out: &CtVector) {
        let now = self.ctx.ledger();
        self.rows.push(TraceRow {
            op: label.to_string(),
            level: out.level(),
            degree: out.degree(),
            delta: now.delta_since(&self.last),
        });
        self.last = now;
    }

    pub fn into_trace(self) -> StepTrace {
        StepTrace { rows: self.rows }
    }
}

/// A simulator error annotated with the stage it happened in.
pub(crate) struct Fail {
    pub err: SimError,
    pub step: usize,
    pub stage: String,
}

pub(crate) type StageResult<T> = Result<T, Fail>;

/// Tags an operation result with its stage for exhaustion reporting.
pub(crate) fn st<T>(r: Result<T, SimError>, step: usize, stage: &str) -> StageResult<T> {
    r.map_err(|err| Fail {
        err,
        step,
        stage: stage.to_string(),
    })
}

/// Converts a circuit body result into a [`CircuitRun`]: level exhaustion
/// becomes a reported outcome, anything else propagates as a real error.
pub(crate) fn seal(rec: Recorder<'_>, result: StageResult<CtVector>) -> Result<CircuitRun, SimError> {
    match result {
        Ok(ct) => Ok(CircuitRun {
            status: RunStatus::Completed {
                level: ct.level(),
                degree: ct.degree(),
            },
            output: Some(ct),
            trace: rec.into_trace(),
        }),
        Err(Fail {
            err: SimError::LevelExhausted,
            step,
            stage,
        }) => Ok(CircuitRun {
            output: None,
            status: RunStatus::LevelExhausted { step, stage },
            trace: rec.into_trace(),
        }),
        Err(Fail { err, .. }) => Err(err),
    }
}
