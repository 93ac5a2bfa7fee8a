//! Holds the closed-form models against executed circuits across the whole
//! configuration matrix: every kind, lengths from 1 to 32, three level
//! budgets, with and without the projection front end.

use hssmlab_core::circuits::{run_kind, CircuitKind, RunSpec, RunStatus};
use hssmlab_core::cost::{op_count_model, predict_level_trace, PredictedOutcome};

const LENGTHS: [usize; 10] = [1, 2, 3, 4, 6, 8, 12, 16, 24, 32];
const DEPTHS: [u32; 3] = [8, 10, 16];

fn matrix() -> impl Iterator<Item = RunSpec> {
    CircuitKind::all().into_iter().flat_map(|kind| {
        LENGTHS.into_iter().flat_map(move |t| {
            DEPTHS.into_iter().flat_map(move |depth| {
                [false, true].into_iter().map(move |projected| RunSpec {
                    kind,
                    t,
                    depth,
                    projected,
                    seed: 42,
                })
            })
        })
    })
}

fn tag(spec: &RunSpec) -> String {
    format!(
        "{} T={} depth={} projected={}",
        spec.kind.name(),
        spec.t,
        spec.depth,
        spec.projected
    )
}

#[test]
fn predicted_stage_schedules_match_executed_traces() {
    for spec in matrix() {
        let got = run_kind(&spec).unwrap();
        let want = predict_level_trace(spec.kind, spec.t, spec.depth, spec.projected);
        let rows = &got.run.trace.rows;
        assert_eq!(
            rows.len(),
            want.stages.len(),
            "{}: stage count (executed last: {:?})",
            tag(&spec),
            rows.last().map(|r| r.op.clone())
        );
        for (row, stage) in rows.iter().zip(&want.stages) {
            assert_eq!(row.op, stage.label, "{}", tag(&spec));
            assert_eq!(
                (row.level, row.degree),
                (stage.level, stage.degree),
                "{} stage {}",
                tag(&spec),
                stage.label
            );
        }
    }
}

#[test]
fn predicted_outcomes_match_run_statuses() {
    for spec in matrix() {
        let got = run_kind(&spec).unwrap();
        let want = predict_level_trace(spec.kind, spec.t, spec.depth, spec.projected);
        match (&got.run.status, &want.outcome) {
            (
                RunStatus::Completed { level, degree },
                PredictedOutcome::Completes {
                    level: plevel,
                    degree: pdegree,
                },
            ) => {
                assert_eq!((level, degree), (plevel, pdegree), "{}", tag(&spec));
            }
            (
                RunStatus::LevelExhausted { step, stage },
                PredictedOutcome::Exhausts {
                    step: pstep,
                    stage: pstage,
                },
            ) => {
                assert_eq!((step, stage), (pstep, pstage), "{}", tag(&spec));
            }
            (status, outcome) => {
                panic!("{}: executed {status:?} but predicted {outcome:?}", tag(&spec));
            }
        }
    }
}

#[test]
fn op_counts_match_every_completed_run() {
    let mut checked = 0usize;
    for spec in matrix() {
        let got = run_kind(&spec).unwrap();
        if !got.run.status.is_completed() {
            continue;
        }
        let ops = op_count_model(spec.kind, spec.t, spec.projected, 8);
        let diff = ops.diff(&got.ledger);
        assert!(diff.is_empty(), "{}: {}", tag(&spec), diff.join("; "));
        checked += 1;
    }
    assert!(checked > 200, "matrix should complete most runs, got {checked}");
}

#[test]
fn residency_peaks_split_linear_from_quadratic_families() {
    for t in [8usize, 16] {
        let quad = run_kind(&RunSpec {
            kind: CircuitKind::AttnFull,
            t,
            depth: 16,
            projected: false,
            seed: 3,
        })
        .unwrap();
        assert!(
            quad.ledger.peak_live_ciphertexts >= (t * t + 3 * t) as u64,
            "T={t}: full-sequence peak {} below the quadratic floor",
            quad.ledger.peak_live_ciphertexts
        );
        for kind in [
            CircuitKind::HssmClosed,
            CircuitKind::HssmStreaming,
            CircuitKind::Naive,
        ] {
            let lin = run_kind(&RunSpec {
                kind,
                t,
                depth: 16,
                projected: false,
                seed: 3,
            })
            .unwrap();
            assert!(
                lin.ledger.peak_live_ciphertexts <= (2 * t + 12) as u64,
                "{} T={t}: peak {} is not linear",
                kind.name(),
                lin.ledger.peak_live_ciphertexts
            );
        }
    }
}
