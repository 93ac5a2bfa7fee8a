//! Flat run reports and their CSV encodings.
//!
//! The bench table is the interchange format between the command-line
//! tools and downstream analysis: one row per run, fixed 27-column header,
//! no quoting (no field the tools emit can contain a comma). Trace tables
//! carry one row per completed stage with the ledger delta that stage
//! accumulated, plus a zero-delta `final` row when the run completed.

use crate::circuits::{CircuitKind, CircuitRun, KindRun, RunStatus};
use crate::cost::{footprint, logical_state_units, FootprintReport};
use crate::error::SimError;
use crate::mock_ckks::LedgerSnapshot;

pub const BENCH_CSV_HEADER: &str = "kind,t,depth,projected,seed,repeat,status,fail_stage,\
final_level,final_degree,mul_ct_ct,mul_ct_pt,add,rescale,level_switch,rotate,encrypt_count,\
decrypt_count,clip_events,live_ciphertexts,peak_live_ciphertexts,sim_cost,state_units,\
feature_cache_units,kv_cache_units,score_units,logical_state";

pub const TRACE_CSV_HEADER: &str =
    "row,op,level,degree,d_mul_ct_ct,d_mul_ct_pt,d_add,d_rescale,d_level_switch,d_rotate";

/// One bench table row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunReport {
    pub kind: CircuitKind,
    pub t: usize,
    pub depth: u32,
    pub projected: bool,
    pub seed: u64,
    pub repeat: u32,
    pub completed: bool,
    /// Stage that exhausted the budget; `None` for completed runs.
    pub fail_stage: Option<String>,
    /// Metadata of the output for completed runs, of the last completed
    /// stage otherwise.
    pub final_level: Option<u32>,
    pub final_degree: Option<u8>,
    pub ledger: LedgerSnapshot,
    pub sim_cost: u64,
    pub footprint: FootprintReport,
    pub logical_state: u64,
}

impl RunReport {
    pub fn new(
        kind: CircuitKind,
        t: usize,
        depth: u32,
        projected: bool,
        seed: u64,
        repeat: u32,
        run: &KindRun,
    ) -> RunReport {
        let (completed, fail_stage, final_meta) = match &run.run.status {
            RunStatus::Completed { level, degree } => (true, None, Some((*level, *degree))),
            RunStatus::LevelExhausted { stage, .. } => {
                (false, Some(stage.clone()), run.run.trace.final_meta())
            }
        };
        RunReport {
            kind,
            t,
            depth,
            projected,
            seed,
            repeat,
            completed,
            fail_stage,
            final_level: final_meta.map(|(l, _)| l),
            final_degree: final_meta.map(|(_, d)| d),
            ledger: run.ledger,
            sim_cost: run.ledger.weighted_cost(),
            footprint: footprint(t),
            logical_state: logical_state_units(kind, t),
        }
    }

    pub fn csv_row(&self) -> String {
        let opt_u32 = |v: Option<u32>| v.map(|x| x.to_string()).unwrap_or_default();
        let l = &self.ledger;
        let f = &self.footprint;
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.kind.name(),
            self.t,
            self.depth,
            self.projected,
            self.seed,
            self.repeat,
            if self.completed { "completed" } else { "level_exhausted" },
            self.fail_stage.as_deref().unwrap_or(""),
            opt_u32(self.final_level),
            opt_u32(self.final_degree.map(u32::from)),
            l.mul_ct_ct,
            l.mul_ct_pt,
            l.add,
            l.rescale,
            l.level_switch,
            l.rotate,
            l.encrypt_count,
            l.decrypt_count,
            l.clip_events,
            l.live_ciphertexts,
            l.peak_live_ciphertexts,
            self.sim_cost,
            f.state_units,
            f.feature_cache_units,
            f.kv_cache_units,
            f.score_units,
            self.logical_state,
        )
    }

    pub fn parse_csv_row(line: &str) -> Result<RunReport, SimError> {
        let bad = |what: &str| SimError::InvalidParams(format!("bench row: {what} in '{line}'"));
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 27 {
            return Err(bad(&format!("expected 27 fields, got {}", fields.len())));
        }
        fn num<T: std::str::FromStr>(s: &str, what: &str, line: &str) -> Result<T, SimError> {
            s.parse().map_err(|_| {
                SimError::InvalidParams(format!("bench row: bad {what} '{s}' in '{line}'"))
            })
        }
        let completed = match fields[6] {
            "completed" => true,
            "level_exhausted" => false,
            other => return Err(bad(&format!("unknown status '{other}'"))),
        };
        fn opt(s: &str) -> Option<&str> {
            (!s.is_empty()).then_some(s)
        }
        let ledger = LedgerSnapshot {
            mul_ct_ct: num(fields[10], "mul_ct_ct", line)?,
            mul_ct_pt: num(fields[11], "mul_ct_pt", line)?,
            add: num(fields[12], "add", line)?,
            rescale: num(fields[13], "rescale", line)?,
            level_switch: num(fields[14], "level_switch", line)?,
            rotate: num(fields[15], "rotate", line)?,
            encrypt_count: num(fields[16], "encrypt_count", line)?,
            decrypt_count: num(fields[17], "decrypt_count", line)?,
            clip_events: num(fields[18], "clip_events", line)?,
            live_ciphertexts: num(fields[19], "live_ciphertexts", line)?,
            peak_live_ciphertexts: num(fields[20], "peak_live_ciphertexts", line)?,
        };
        Ok(RunReport {
            kind: CircuitKind::parse(fields[0])?,
            t: num(fields[1], "t", line)?,
            depth: num(fields[2], "depth", line)?,
            projected: match fields[3] {
                "true" => true,
                "false" => false,
                other => return Err(bad(&format!("bad projected flag '{other}'"))),
            },
            seed: num(fields[4], "seed", line)?,
            repeat: num(fields[5], "repeat", line)?,
            completed,
            fail_stage: opt(fields[7]).map(str::to_string),
            final_level: opt(fields[8]).map(|s| num(s, "final_level", line)).transpose()?,
            final_degree: opt(fields[9]).map(|s| num(s, "final_degree", line)).transpose()?,
            ledger,
            sim_cost: num(fields[21], "sim_cost", line)?,
            footprint: FootprintReport {
                state_units: num(fields[22], "state_units", line)?,
                feature_cache_units: num(fields[23], "feature_cache_units", line)?,
                kv_cache_units: num(fields[24], "kv_cache_units", line)?,
                score_units: num(fields[25], "score_units", line)?,
            },
            logical_state: num(fields[26], "logical_state", line)?,
        })
    }
}

/// Renders a run's stage table: one row per completed stage with that
/// stage's ledger delta, and a zero-delta `final` row carrying the output
/// metadata when the run completed.
pub fn trace_csv(run: &CircuitRun) -> String {
    let mut out = String::from(TRACE_CSV_HEADER);
    out.push('\n');
    for (i, row) in run.trace.rows.iter().enumerate() {
        let d = &row.delta;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            i,
            row.op,
            row.level,
            row.degree,
            d.mul_ct_ct,
            d.mul_ct_pt,
            d.add,
            d.rescale,
            d.level_switch,
            d.rotate
        ));
    }
    if let RunStatus::Completed { level, degree } = run.status {
        out.push_str(&format!(
            "{},final,{level},{degree},0,0,0,0,0,0\n",
            run.trace.rows.len()
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{run_kind, RunSpec};

    fn sample(kind: CircuitKind, t: usize, depth: u32) -> (RunSpec, KindRun) {
        let spec = RunSpec {
            kind,
            t,
            depth,
            projected: false,
            seed: 9,
        };
        let run = run_kind(&spec).unwrap();
        (spec, run)
    }

    #[test]
    fn header_and_rows_have_twenty_seven_columns() {
        assert_eq!(BENCH_CSV_HEADER.split(',').count(), 27);
        let (spec, run) = sample(CircuitKind::HssmClosed, 4, 8);
        let report = RunReport::new(spec.kind, spec.t, spec.depth, false, spec.seed, 0, &run);
        assert_eq!(report.csv_row().split(',').count(), 27);
    }

    #[test]
    fn rows_round_trip_for_completed_and_exhausted_runs() {
        for (kind, t, depth) in [
            (CircuitKind::HssmClosed, 4, 8),
            (CircuitKind::AttnFull, 3, 8),
            (CircuitKind::Naive, 9, 8),
            (CircuitKind::HssmStreaming, 12, 8),
        ] {
            let (spec, run) = sample(kind, t, depth);
            let report = RunReport::new(kind, t, depth, false, spec.seed, 2, &run);
            let parsed = RunReport::parse_csv_row(&report.csv_row()).unwrap();
            assert_eq!(parsed, report, "{}", kind.name());
        }
    }

    #[test]
    fn exhausted_rows_name_the_failing_stage() {
        let (spec, run) = sample(CircuitKind::Naive, 9, 8);
        let report = RunReport::new(spec.kind, spec.t, spec.depth, false, spec.seed, 0, &run);
        assert!(!report.completed);
        assert_eq!(report.fail_stage.as_deref(), Some("carry[7]"));
        let row = report.csv_row();
        assert!(row.contains(",level_exhausted,carry[7],"));
    }

    #[test]
    fn sim_cost_column_is_the_weighted_ledger() {
        let (spec, run) = sample(CircuitKind::AttnFinal, 4, 8);
        let report = RunReport::new(spec.kind, spec.t, spec.depth, false, spec.seed, 0, &run);
        assert_eq!(report.sim_cost, run.ledger.weighted_cost());
        assert!(report.sim_cost > 0);
    }

    #[test]
    fn trace_table_appends_a_final_row_only_when_completed() {
        let (_, run) = sample(CircuitKind::HssmClosed, 3, 8);
        let csv = trace_csv(&run.run);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], TRACE_CSV_HEADER);
        assert_eq!(lines.len(), 1 + run.run.trace.rows.len() + 1);
        let last = lines.last().unwrap();
        assert!(last.contains(",final,"));
        assert!(last.ends_with("0,0,0,0,0,0"));

        let (_, run) = sample(CircuitKind::Naive, 9, 8);
        let csv = trace_csv(&run.run);
        assert_eq!(csv.lines().count(), 1 + run.run.trace.rows.len());
        assert!(!csv.contains(",final,"));
    }
}
