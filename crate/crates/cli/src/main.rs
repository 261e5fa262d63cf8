use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tempdrift_core::model::{write_csv, write_jsonl};
use tempdrift_core::pipeline::{canonical_json, run_baselines_only};
use tempdrift_core::{
    emit_report, generate_stream, run_analyze, DriftReport, EmitFormat, Error, InputFormat, RunConfig, Stage,
};

const EXIT_DRIFT: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_DATA: u8 = 3;

/// Zero-training drift detection over prediction logs.
#[derive(Parser)]
#[command(name = "tempdrift", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline and write a drift report.
    Analyze(AnalyzeArgs),
    /// Generate a synthetic prediction stream.
    Synth(SynthArgs),
    /// Run only the two-sample baselines for each event.
    Baselines(InputArgs),
    /// Re-render a stored JSON report.
    Report(ReportArgs),
}

#[derive(Args)]
struct InputArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Prediction log; replaces the configured inputs.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Input format (jsonl or csv).
    #[arg(long)]
    format: Option<InputFormat>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the random seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Report format: json, markdown or csv-series.
    #[arg(long)]
    emit: Option<EmitFormat>,
    /// Exit with status 1 when any event drifts.
    #[arg(long)]
    fail_on_drift: bool,
    /// Record wall-clock runtime in the report.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct SynthArgs {
    /// TOML run configuration; its `[synth]` table drives the generator.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output format (jsonl or csv).
    #[arg(long, default_value = "jsonl")]
    format: InputFormat,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct ReportArgs {
    /// JSON report written by `analyze`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "markdown")]
    emit: EmitFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

fn load_config(path: Option<&Path>) -> Result<RunConfig, Failure> {
    match path {
        Some(p) => RunConfig::from_file(p).map_err(Failure::from),
        None => Ok(RunConfig::default()),
    }
}

fn apply_input_args(cfg: &mut RunConfig, args: &InputArgs) {
    if let Some(input) = &args.input {
        cfg.input.paths = vec![input.clone()];
    }
    if let Some(format) = args.format {
        cfg.input.format = format;
    }
    if let Some(seed) = args.seed {
        cfg.stats.seed = seed;
    }
    if args.out.is_some() {
        cfg.output.path = args.out.clone();
    }
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    let res = match path {
        Some(p) => fs::write(p, bytes),
        None => io::stdout().lock().write_all(bytes),
    };
    res.map_err(|e| Failure::Usage(format!("cannot write output: {e}")))
}

fn analyze(args: AnalyzeArgs) -> Result<u8, Failure> {
    let mut cfg = load_config(args.input.config.as_deref())?;
    apply_input_args(&mut cfg, &args.input);
    if let Some(emit) = args.emit {
        cfg.output.emit = emit;
    }
    if args.timing {
        cfg.output.include_timing = true;
    }
    if cfg.input.paths.is_empty() {
        return Err(Failure::Usage("no input: pass --input or set input.paths".into()));
    }
    let report = run_analyze(&cfg)?;
    let bytes = emit_report(&report, cfg.output.emit)?;
    write_output(cfg.output.path.as_deref(), &bytes)?;
    for e in &report.events {
        eprintln!(
            "{}: {}",
            e.name,
            if e.verdict.detected {
                "drift detected"
            } else {
                "no drift"
            }
        );
    }
    Ok(if args.fail_on_drift && report.any_drift() {
        EXIT_DRIFT
    } else {
        0
    })
}

fn synth(args: SynthArgs) -> Result<u8, Failure> {
    let cfg = load_config(args.config.as_deref())?;
    let mut synth = cfg.synth.unwrap_or_default();
    if let Some(seed) = args.seed {
        synth.seed = seed;
    }
    let ds = generate_stream(&synth)?;
    let mut buf = Vec::new();
    match args.format {
        InputFormat::Jsonl => write_jsonl(&ds, &mut buf)?,
        InputFormat::Csv => write_csv(&ds, &mut buf)?,
    }
    write_output(args.out.as_deref(), &buf)?;
    eprintln!("wrote {} records over {} days", ds.len(), synth.n_days);
    Ok(0)
}

fn baselines(args: InputArgs) -> Result<u8, Failure> {
    let mut cfg = load_config(args.config.as_deref())?;
    apply_input_args(&mut cfg, &args);
    if cfg.input.paths.is_empty() {
        return Err(Failure::Usage("no input: pass --input or set input.paths".into()));
    }
    let out = run_baselines_only(&cfg)?;
    write_output(cfg.output.path.as_deref(), canonical_json(&out)?.as_bytes())?;
    Ok(0)
}

fn report(args: ReportArgs) -> Result<u8, Failure> {
    let text = fs::read_to_string(&args.input)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", args.input.display())))?;
    let report: DriftReport = serde_json::from_str(&text)
        .map_err(|e| Failure::Usage(format!("{} is not a drift report: {e}", args.input.display())))?;
    write_output(args.out.as_deref(), &emit_report(&report, args.emit)?)?;
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(a) => analyze(a),
        Command::Synth(a) => synth(a),
        Command::Baselines(a) => baselines(a),
        Command::Report(a) => report(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            let data = e.is_data_error() || e.stage() == Some(Stage::Ingest);
            ExitCode::from(if data { EXIT_DATA } else { EXIT_USAGE })
        }
    }
}
