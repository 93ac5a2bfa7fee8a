//! Subcommand bodies: argument shapes, execution, and row emission.
//!
//! # Architecture
//! - Every command builds its full output as a string and hands it to one
//!   sink, so rows land in `--out` or on stdout identically.
//! - Grid commands fan independent rows out through the core worker funnel
//!   and keep the input order, so output never depends on scheduling.
//! - Commands return the exit code for clean runs and modeled failures;
//!   everything fatal travels as a [`Failure`] with its own code.

use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;

use hssmlab_core::circuits::{run_kind, CircuitKind, RunSpec};
use hssmlab_core::cost::{self, DepthParams};
use hssmlab_core::exec::map_collect;
use hssmlab_core::pipeline::{
    load_dataset, load_vectors, run_classification, synthetic_dataset, DatasetSplit, Embeddings,
    ModelKind, PipelineError, DEFAULT_LAMBDA, EXAMPLE_CSV_HEADER,
};
use hssmlab_core::report::{trace_csv, RunReport, BENCH_CSV_HEADER};
use hssmlab_core::SimError;

use crate::config::Config;
use crate::{Failure, EXIT_MODELED_FAILURE};

const DEFAULT_DEPTH: u32 = 8;
const DEFAULT_REPEATS: u32 = 1;

impl From<PipelineError> for Failure {
    fn from(err: PipelineError) -> Failure {
        match err {
            PipelineError::Io(io) if io.kind() == std::io::ErrorKind::NotFound => {
                Failure::MissingInput(io.to_string())
            }
            PipelineError::Io(io) => Failure::Runtime(io.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

fn parse_kind(name: &str) -> Result<CircuitKind, Failure> {
    CircuitKind::parse(name).map_err(|err| Failure::Usage(err.to_string()))
}

fn check_lengths(lengths: &[usize]) -> Result<(), Failure> {
    if lengths.contains(&0) {
        return Err(Failure::Usage("sequence lengths must be >= 1".to_string()));
    }
    Ok(())
}

/// Writes the finished table to `--out` or stdout.
fn emit(out: Option<&Path>, content: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, content)
            .map_err(|err| Failure::Runtime(format!("writing {}: {err}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

#[derive(Args)]
pub struct TraceArgs {
    /// Circuit kind: hssm-closed, hssm-streaming, hssm-multi, naive,
    /// final-token, full-seq, or quad-attn.
    #[arg(long)]
    kind: String,
    /// Sequence length.
    #[arg(long = "T", default_value_t = 8)]
    t: usize,
    /// Level budget at encryption.
    #[arg(long)]
    depth: Option<u32>,
    /// Route inputs through the seeded projection front end.
    #[arg(long)]
    project: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path; stdout when absent.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

pub fn trace(args: &TraceArgs, cfg: &Config) -> Result<u8, Failure> {
    check_lengths(&[args.t])?;
    let spec = RunSpec {
        kind: parse_kind(&args.kind)?,
        t: args.t,
        depth: args.depth.or(cfg.depth).unwrap_or(DEFAULT_DEPTH),
        projected: args.project,
        seed: cfg.seed(args.seed)?,
    };
    let run = run_kind(&spec).map_err(sim_failure)?;
    emit(args.out.as_deref(), &trace_csv(&run.run))?;
    Ok(if run.run.status.is_completed() {
        0
    } else {
        EXIT_MODELED_FAILURE
    })
}

#[derive(Args)]
pub struct BenchArgs {
    /// Comma-separated circuit kinds.
    #[arg(long, value_delimiter = ',', required = true)]
    kinds: Vec<String>,
    /// Comma-separated sequence lengths.
    #[arg(long = "T", value_delimiter = ',', required = true)]
    t: Vec<usize>,
    /// Level budget at encryption.
    #[arg(long)]
    depth: Option<u32>,
    /// Identical-seed repetitions per configuration.
    #[arg(long)]
    repeats: Option<u32>,
    /// Route inputs through the seeded projection front end.
    #[arg(long)]
    project: bool,
    /// Run rows on the calling thread instead of the worker pool.
    #[arg(long)]
    sequential: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path; stdout when absent.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

pub fn bench(args: &BenchArgs, cfg: &Config) -> Result<u8, Failure> {
    check_lengths(&args.t)?;
    let kinds: Vec<CircuitKind> = args
        .kinds
        .iter()
        .map(|name| parse_kind(name))
        .collect::<Result<_, _>>()?;
    let repeats = args.repeats.or(cfg.repeats).unwrap_or(DEFAULT_REPEATS);
    if repeats == 0 {
        return Err(Failure::Usage("repeats must be >= 1".to_string()));
    }
    let depth = args.depth.or(cfg.depth).unwrap_or(DEFAULT_DEPTH);
    let seed = cfg.seed(args.seed)?;

    let mut grid = Vec::new();
    for &kind in &kinds {
        for &t in &args.t {
            for repeat in 0..repeats {
                let spec = RunSpec {
                    kind,
                    t,
                    depth,
                    projected: args.project,
                    seed,
                };
                grid.push((spec, repeat));
            }
        }
    }
    let rows = map_collect(&grid, !args.sequential, |(spec, repeat)| {
        run_kind(spec).map(|run| RunReport::new(spec.kind, spec.t, spec.depth, spec.projected, spec.seed, *repeat, &run))
    });

    let mut table = String::from(BENCH_CSV_HEADER);
    table.push('\n');
    let mut failed = false;
    for row in rows {
        let report = row.map_err(sim_failure)?;
        failed |= !report.completed;
        table.push_str(&report.csv_row());
        table.push('\n');
    }
    emit(args.out.as_deref(), &table)?;
    Ok(if failed { EXIT_MODELED_FAILURE } else { 0 })
}

#[derive(Args)]
pub struct FootprintArgs {
    /// Comma-separated sequence lengths.
    #[arg(long = "T", value_delimiter = ',', required = true)]
    t: Vec<usize>,
    /// Output CSV path; stdout when absent.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

pub fn footprint(args: &FootprintArgs) -> Result<u8, Failure> {
    let mut table =
        String::from("t,state_units,feature_cache_units,kv_cache_units,score_units\n");
    for &t in &args.t {
        let f = cost::footprint(t);
        table.push_str(&format!(
            "{t},{},{},{},{}\n",
            f.state_units, f.feature_cache_units, f.kv_cache_units, f.score_units
        ));
    }
    emit(args.out.as_deref(), &table)?;
    Ok(0)
}

#[derive(Args)]
pub struct DepthArgs {
    /// Largest sequence length in the curve.
    #[arg(long = "t-max")]
    t_max: usize,
    /// Multiplicative depth of the gate polynomial.
    #[arg(long = "d-g", default_value_t = 2)]
    d_g: u32,
    /// Multiplicative depth of the write branch.
    #[arg(long = "d-w", default_value_t = 3)]
    d_w: u32,
    /// Multiplicative depth of the initial state.
    #[arg(long = "d-h0", default_value_t = 0)]
    d_h0: u32,
    /// Output CSV path; stdout when absent.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

pub fn depth(args: &DepthArgs) -> Result<u8, Failure> {
    if args.t_max == 0 {
        return Err(Failure::Usage("t-max must be >= 1".to_string()));
    }
    let params = DepthParams {
        d_g: args.d_g,
        d_w: args.d_w,
        d_h0: args.d_h0,
    };
    let mut table = String::from("t,naive_depth,hssm_depth\n");
    for t in 1..=args.t_max {
        table.push_str(&format!(
            "{t},{},{}\n",
            cost::carry_depth_naive(&params, t),
            cost::carry_depth_hssm(&params, t)
        ));
    }
    emit(args.out.as_deref(), &table)?;
    Ok(0)
}

#[derive(Args)]
pub struct StressArgs {
    /// Circuit kind whose working set is held against the budget.
    #[arg(long)]
    kind: String,
    /// Comma-separated sequence lengths.
    #[arg(long = "T", value_delimiter = ',', required = true)]
    t: Vec<usize>,
    /// Residency budget in logical ciphertext units.
    #[arg(long)]
    budget: Option<u64>,
    /// Output CSV path; stdout when absent.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

pub fn stress(args: &StressArgs, cfg: &Config) -> Result<u8, Failure> {
    let kind = parse_kind(&args.kind)?;
    let budget = args.budget.or(cfg.budget).unwrap_or(cost::CALIBRATED_BUDGET);
    let mut table = String::from("kind,t,logical_units,required_units,budget,status\n");
    let mut failed = false;
    for &t in &args.t {
        let check = cost::stress_check(kind, t, budget);
        failed |= !check.ok;
        table.push_str(&format!(
            "{},{t},{},{},{},{}\n",
            kind.name(),
            check.logical_units,
            check.required_units,
            check.budget,
            if check.ok { "ok" } else { "modeled_oom" }
        ));
    }
    emit(args.out.as_deref(), &table)?;
    Ok(if failed { EXIT_MODELED_FAILURE } else { 0 })
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["dataset", "synthetic"])))]
pub struct ClassifyArgs {
    /// TSV dataset, one `label<TAB>text` row per line; the run trains and
    /// verifies on the same rows.
    #[arg(long, value_name = "PATH")]
    dataset: Option<PathBuf>,
    /// Use the built-in seeded corpus: 200 training and 200 validation rows.
    #[arg(long)]
    synthetic: bool,
    /// Whitespace-separated embedding table with a `count dim` header line.
    #[arg(long, value_name = "PATH", conflicts_with = "hashed")]
    vectors: Option<PathBuf>,
    /// Derive embeddings from seeded token hashes instead of a vector file.
    #[arg(long)]
    hashed: bool,
    /// Model kind: hssm, multi-decay, final-token, or full-seq.
    #[arg(long)]
    model: String,
    /// Ridge strength for the readout fit.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Score examples on the calling thread instead of the worker pool.
    #[arg(long)]
    sequential: bool,
    /// Per-example CSV path; appended to stdout after the JSON when absent.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

pub fn classify(args: &ClassifyArgs, cfg: &Config) -> Result<u8, Failure> {
    let kind = ModelKind::parse(&args.model).map_err(|err| Failure::Usage(err.to_string()))?;
    let seed = cfg.seed(args.seed)?;
    let lambda = args.lambda.or(cfg.lambda).unwrap_or(DEFAULT_LAMBDA);

    let embeddings = match &args.vectors {
        Some(path) => {
            let table = load_vectors(path)?;
            for warning in table.warnings() {
                eprintln!("hssmlab: warning: {warning}");
            }
            Embeddings::Table(table)
        }
        None if args.hashed || args.synthetic => Embeddings::hashed(seed),
        None => {
            return Err(Failure::Usage(
                "classify with --dataset needs --vectors or --hashed".to_string(),
            ))
        }
    };

    let (train, val): (DatasetSplit, DatasetSplit) = match &args.dataset {
        Some(path) => {
            let split = load_dataset(path)?;
            (split.clone(), split)
        }
        None => synthetic_dataset(seed),
    };

    let outcome = run_classification(
        &train,
        &val,
        &embeddings,
        kind,
        lambda,
        seed,
        !args.sequential,
    )?;
    let json = serde_json::to_string(&outcome.report)
        .map_err(|err| Failure::Runtime(format!("serializing report: {err}")))?;
    println!("{json}");

    let mut table = String::from(EXAMPLE_CSV_HEADER);
    table.push('\n');
    for row in &outcome.rows {
        table.push_str(&row.csv_row());
        table.push('\n');
    }
    emit(args.out.as_deref(), &table)?;

    let failed = outcome.rows.iter().any(|row| !row.enc_score.is_finite());
    Ok(if failed { EXIT_MODELED_FAILURE } else { 0 })
}

fn sim_failure(err: SimError) -> Failure {
    match err {
        SimError::InvalidParams(_) => Failure::Usage(err.to_string()),
        other => Failure::Runtime(other.to_string()),
    }
}
