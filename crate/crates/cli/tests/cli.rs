//! Black-box checks of the installed binary: golden headers and rows, the
//! exit-code contract, and the flag/config/environment precedence chain.

use std::fs;
use std::io::Write;
use std::process::{Command, Output};

use hssmlab_core::report::{RunReport, BENCH_CSV_HEADER, TRACE_CSV_HEADER};

fn hssmlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hssmlab"))
        .args(args)
        .env_remove("HSSMLAB_SEED")
        .output()
        .expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn code_of(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn trace_emits_the_schedule_with_a_final_metadata_row() {
    let out = hssmlab(&["trace", "--kind", "hssm-closed", "--T", "8", "--depth", "8", "--project"]);
    let text = stdout_of(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(code_of(&out), 0);
    assert_eq!(lines[0], TRACE_CSV_HEADER);
    assert!(lines.last().unwrap().contains(",final,3,2,"), "{text}");

    let out = hssmlab(&["trace", "--kind", "hssm-closed", "--T", "8", "--depth", "8"]);
    let text = stdout_of(&out);
    assert_eq!(code_of(&out), 0);
    assert!(text.lines().last().unwrap().contains(",final,4,2,"), "{text}");

    let out = hssmlab(&["trace", "--kind", "hssm-closed", "--T", "1", "--depth", "8"]);
    let text = stdout_of(&out);
    assert!(
        text.lines().last().unwrap().contains(",final,4,2,"),
        "schedule must not depend on length: {text}"
    );
}

#[test]
fn trace_exhaustion_exits_two_and_keeps_the_partial_rows() {
    let out = hssmlab(&["trace", "--kind", "hssm-streaming", "--T", "8", "--depth", "8"]);
    let text = stdout_of(&out);
    assert_eq!(code_of(&out), 2);
    assert!(text.lines().count() > 10, "partial trace expected: {text}");
    assert!(!text.contains(",final,"), "no final row on exhaustion: {text}");
}

#[test]
fn usage_errors_exit_sixty_four() {
    assert_eq!(code_of(&hssmlab(&["trace", "--kind", "nope"])), 64);
    assert_eq!(code_of(&hssmlab(&["trace", "--kind", "hssm", "--T", "0"])), 64);
    assert_eq!(code_of(&hssmlab(&["nonsense"])), 64);
    assert_eq!(code_of(&hssmlab(&["bench", "--kinds", "hssm"])), 64);
    assert_eq!(code_of(&hssmlab(&["--help"])), 0);
}

#[test]
fn bench_logical_state_column_matches_the_paired_table() {
    let out = hssmlab(&[
        "bench",
        "--kinds",
        "hssm,final-token,full-seq",
        "--T",
        "16,128",
        "--depth",
        "8",
    ]);
    assert_eq!(code_of(&out), 0);
    let text = stdout_of(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), BENCH_CSV_HEADER);
    let state: Vec<(String, usize, u64)> = lines
        .map(|line| {
            let fields: Vec<&str> = line.split(',').collect();
            (
                fields[0].to_string(),
                fields[1].parse().unwrap(),
                fields.last().unwrap().parse().unwrap(),
            )
        })
        .collect();
    let expect = [
        ("hssm-closed", 16, 1),
        ("hssm-closed", 128, 1),
        ("final-token", 16, 33),
        ("final-token", 128, 257),
        ("full-seq", 16, 48),
        ("full-seq", 128, 384),
    ];
    for (got, want) in state.iter().zip(expect) {
        assert_eq!((got.0.as_str(), got.1, got.2), want);
    }
}

#[test]
fn bench_repeats_are_identical_and_rows_round_trip() {
    let out = hssmlab(&["bench", "--kinds", "hssm", "--T", "8", "--repeats", "3", "--seed", "5"]);
    assert_eq!(code_of(&out), 0);
    let text = stdout_of(&out);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    for (repeat, row) in rows.iter().enumerate() {
        let report = RunReport::parse_csv_row(row).unwrap();
        assert_eq!(report.csv_row(), *row, "row must round-trip");
        assert_eq!(report.repeat, repeat as u32);
        let mut fields: Vec<&str> = row.split(',').collect();
        fields[5] = "0";
        assert_eq!(fields.join(","), rows[0], "repeats differ only in the repeat column");
    }
}

#[test]
fn sequential_flag_reproduces_the_parallel_rows() {
    let fanned = hssmlab(&["bench", "--kinds", "hssm,naive", "--T", "4,8", "--depth", "12"]);
    let serial = hssmlab(&[
        "bench", "--kinds", "hssm,naive", "--T", "4,8", "--depth", "12", "--sequential",
    ]);
    assert_eq!(stdout_of(&fanned), stdout_of(&serial));
    assert_eq!(code_of(&fanned), code_of(&serial));
}

#[test]
fn footprint_rows_are_exact() {
    let out = hssmlab(&["footprint", "--T", "3,36,1066"]);
    assert_eq!(code_of(&out), 0);
    assert_eq!(
        stdout_of(&out),
        "t,state_units,feature_cache_units,kv_cache_units,score_units\n\
         3,1,3,6,9\n36,1,36,72,1296\n1066,1,1066,2132,1136356\n"
    );
}

#[test]
fn depth_curves_follow_both_recurrences() {
    let out = hssmlab(&["depth", "--t-max", "6", "--d-g", "1", "--d-w", "2", "--d-h0", "0"]);
    assert_eq!(code_of(&out), 0);
    let text = stdout_of(&out);
    for (i, line) in text.lines().skip(1).enumerate() {
        let t = i + 1;
        assert_eq!(line, format!("{t},{},2", t + 1));
    }
}

#[test]
fn stress_crosses_the_budget_between_thirty_two_and_thirty_six() {
    let out = hssmlab(&["stress", "--kind", "quad-attn", "--T", "32,36", "--budget", "1100"]);
    assert_eq!(code_of(&out), 2);
    let text = stdout_of(&out);
    assert!(text.contains("quad-attn,32,1024,1032,1100,ok"), "{text}");
    assert!(text.contains("quad-attn,36,1296,1304,1100,modeled_oom"), "{text}");

    let out = hssmlab(&["stress", "--kind", "quad-attn", "--T", "36", "--budget", "1305"]);
    assert_eq!(code_of(&out), 0);
    assert!(stdout_of(&out).contains(",ok"), "raised budget clears T=36");
}

#[test]
fn classify_synthetic_reports_full_agreement() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("rows.csv");
    let out = hssmlab(&[
        "classify",
        "--synthetic",
        "--model",
        "hssm",
        "--seed",
        "7",
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    assert_eq!(code_of(&out), 0);
    let report: serde_json::Value = serde_json::from_str(stdout_of(&out).lines().next().unwrap())
        .expect("first stdout line is the JSON report");
    assert_eq!(report["model"], "hssm-closed");
    assert_eq!(report["n"], 200);
    assert_eq!(report["match_fraction"], 1.0);
    assert_eq!(report["final_level"], 4);
    assert_eq!(report["ledger"]["clip_events"], 0);

    let rows = fs::read_to_string(&csv_path).unwrap();
    let mut lines = rows.lines();
    assert_eq!(
        lines.next().unwrap(),
        "index,label,plain_score,enc_score,score_delta,plain_decision,enc_decision,agree"
    );
    assert_eq!(lines.count(), 200);
}

#[test]
fn classify_reads_dataset_and_vector_files() {
    let dir = tempfile::tempdir().unwrap();
    let dataset = dir.path().join("reviews.tsv");
    let vectors = dir.path().join("vectors.txt");
    let mut f = fs::File::create(&dataset).unwrap();
    for _ in 0..3 {
        writeln!(f, "1\tgood fun good ride").unwrap();
        writeln!(f, "0\tbad dull bad slog").unwrap();
    }
    fs::write(&vectors, "5 2\ngood 0.9 0.1\nfun 0.8 0.3\nbad -0.9 0.2\ndull -0.7 -0.4\ngood 1.0 0.0\n").unwrap();

    let out = hssmlab(&[
        "classify",
        "--dataset",
        dataset.to_str().unwrap(),
        "--vectors",
        vectors.to_str().unwrap(),
        "--model",
        "final-token",
        "--seed",
        "3",
    ]);
    assert_eq!(code_of(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("warning"), "duplicate vector row warns: {stderr}");
    let text = stdout_of(&out);
    let report: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(report["n"], 6);
    assert_eq!(text.lines().count(), 1 + 1 + 6, "JSON, header, six rows");
}

#[test]
fn classify_source_flags_are_validated() {
    assert_eq!(code_of(&hssmlab(&["classify", "--model", "hssm"])), 64);
    let both = hssmlab(&["classify", "--synthetic", "--dataset", "x.tsv", "--model", "hssm"]);
    assert_eq!(code_of(&both), 64);
    let missing = hssmlab(&["classify", "--dataset", "absent.tsv", "--hashed", "--model", "hssm"]);
    assert_eq!(code_of(&missing), 66);
    let no_emb = hssmlab(&["classify", "--dataset", "absent.tsv", "--model", "hssm"]);
    assert_eq!(code_of(&no_emb), 64, "embedding source is checked before I/O");
    assert_eq!(code_of(&hssmlab(&["classify", "--synthetic", "--model", "naive"])), 64);
}

#[test]
fn seed_resolution_prefers_flag_then_config_then_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "seed = 9\ndepth = 10\n").unwrap();
    let seed_col = |out: &Output| {
        stdout_of(out)
            .lines()
            .nth(1)
            .unwrap()
            .split(',')
            .nth(4)
            .unwrap()
            .to_string()
    };

    let from_cfg = hssmlab(&["bench", "--kinds", "hssm", "--T", "2", "--config", cfg.to_str().unwrap()]);
    assert_eq!(seed_col(&from_cfg), "9");
    let row = stdout_of(&from_cfg);
    assert!(row.lines().nth(1).unwrap().starts_with("hssm-closed,2,10,"), "config depth applies: {row}");

    let flag_wins = hssmlab(&[
        "bench", "--kinds", "hssm", "--T", "2", "--config", cfg.to_str().unwrap(), "--seed", "3",
    ]);
    assert_eq!(seed_col(&flag_wins), "3");

    let from_env = Command::new(env!("CARGO_BIN_EXE_hssmlab"))
        .args(["bench", "--kinds", "hssm", "--T", "2"])
        .env("HSSMLAB_SEED", "11")
        .output()
        .unwrap();
    assert_eq!(seed_col(&from_env), "11");

    let bad_env = Command::new(env!("CARGO_BIN_EXE_hssmlab"))
        .args(["bench", "--kinds", "hssm", "--T", "2"])
        .env("HSSMLAB_SEED", "many")
        .output()
        .unwrap();
    assert_eq!(bad_env.status.code(), Some(64));

    let default = hssmlab(&["bench", "--kinds", "hssm", "--T", "2"]);
    assert_eq!(seed_col(&default), "42");
}

#[test]
fn config_file_errors_map_to_the_exit_contract() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, "wat = 1\n").unwrap();
    let out = hssmlab(&["bench", "--kinds", "hssm", "--T", "2", "--config", bad.to_str().unwrap()]);
    assert_eq!(code_of(&out), 64);
    assert!(String::from_utf8_lossy(&out.stderr).contains("wat"));

    let absent = dir.path().join("absent.cfg");
    let out = hssmlab(&["bench", "--kinds", "hssm", "--T", "2", "--config", absent.to_str().unwrap()]);
    assert_eq!(code_of(&out), 66);
}
