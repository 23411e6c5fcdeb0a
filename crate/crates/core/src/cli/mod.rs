//! The `madre` command line: run an experiment setting, then evaluate,
//! compare and price its outputs.

pub mod experiment;
pub mod manifest;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use chrono::Utc;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::classify::{load_dataset, read_predictions, run_baseline, run_mad, write_predictions, Dataset, RunOutput};
use crate::engine::{write_jsonl, DebateError};
use crate::eval::report::{cost_table, format_thousands, mcnemar_table, metrics_table};
use crate::eval::{
    compute_metrics, mcnemar_with, pair_predictions, usage_report, ContingencyTable, McNemarResult, McNemarVariant,
};
use crate::llm::{
    estimate_cost, ChatBackend, DisplayCost, InFlightLimit, Limited, MockBackend, MockScript, PriceTable,
    RemoteBackend, Usage, DEFAULT_IN_FLIGHT,
};
use experiment::{ExperimentConfig, ExperimentError, Pipeline};
use manifest::{BackendInfo, DatasetInfo, RunManifest, MANIFEST_FILE, PREDICTIONS_FILE};

/// Items run during a dry-run probe.
pub const PROBE_ITEMS: usize = 3;

#[derive(Debug, Parser)]
#[command(
    name = "madre",
    version,
    about = "Multi-agent debate experiments for requirements classification"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify a dataset with the pipeline described by a config file.
    Run(RunArgs),
    /// Correctness metrics for a predictions file.
    Evaluate(EvaluateArgs),
    /// McNemar test between two runs over the same items.
    Compare(CompareArgs),
    /// Token totals and estimated cost of a finished run.
    Cost(CostArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendKind {
    /// OpenAI-compatible API; the key is read from OPENAI_API_KEY.
    Remote,
    /// Scripted offline responses (needs --mock-script).
    Mock,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Dataset CSV with columns id,text,label.
    #[arg(long)]
    pub dataset: PathBuf,
    /// Run directory for predictions.csv, transcripts/ and manifest.json.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "remote")]
    pub backend: BackendKind,
    /// Mock response script (TOML), required with --backend mock.
    #[arg(long, required_if_eq("backend", "mock"))]
    pub mock_script: Option<PathBuf>,
    /// Upper bound on concurrent backend requests.
    #[arg(long, default_value_t = DEFAULT_IN_FLIGHT, value_parser = positive)]
    pub max_concurrency: usize,
    /// Probe a few items, print a token and cost estimate for the whole dataset, and exit.
    #[arg(long)]
    pub dry_run: bool,
    /// Price file used for the dry-run cost estimate.
    #[arg(long)]
    pub prices: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Predictions CSV written by `run`.
    #[arg(long)]
    pub predictions: PathBuf,
    /// Where to write the JSON report [default: metrics.json next to the predictions].
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Candidate predictions (its wins are counted in b).
    #[arg(long)]
    pub a: PathBuf,
    /// Baseline predictions (its wins are counted in c).
    #[arg(long)]
    pub b: PathBuf,
    #[arg(long, value_enum, default_value = "continuity-corrected")]
    pub variant: VariantArg,
    /// Also write the table and test result as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum VariantArg {
    ContinuityCorrected,
    Uncorrected,
    ExactBinomial,
}

impl From<VariantArg> for McNemarVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::ContinuityCorrected => McNemarVariant::ContinuityCorrected,
            VariantArg::Uncorrected => McNemarVariant::Uncorrected,
            VariantArg::ExactBinomial => McNemarVariant::ExactBinomial,
        }
    }
}

#[derive(Debug, Args)]
pub struct CostArgs {
    /// Run directory written by `run`.
    #[arg(long)]
    pub run: PathBuf,
    /// Price file (TOML).
    #[arg(long)]
    pub prices: PathBuf,
}

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    InvalidConfig = 1,
    BadInput = 2,
    BackendUnreachable = 3,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Unreachable(String),
}

impl CliError {
    pub fn exit(&self) -> Exit {
        match self {
            CliError::Config(_) => Exit::InvalidConfig,
            CliError::Input(_) => Exit::BadInput,
            CliError::Unreachable(_) => Exit::BackendUnreachable,
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Invalid(violations) => {
                let mut msg = format!("invalid debate config ({} violation(s)):", violations.len());
                for v in violations {
                    msg.push_str(&format!("\n  {}: {}", v.code, v.message));
                }
                CliError::Config(msg)
            }
            other => CliError::Config(other.to_string()),
        }
    }
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(format!("expected a positive integer, got `{s}`")),
    }
}

fn input_err(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

/// Runs one command, writing reports to `out`. Errors are returned, not printed.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Run(args) => cmd_run(args, out),
        Command::Evaluate(args) => cmd_evaluate(args, out),
        Command::Compare(args) => cmd_compare(args, out),
        Command::Cost(args) => cmd_cost(args, out),
    }
}

/// Parses `args`, runs the command, prints errors to `err`, and returns the exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() {
                Exit::InvalidConfig as i32
            } else {
                Exit::Ok as i32
            };
        }
    };
    match execute(&cli, out) {
        Ok(()) => Exit::Ok as i32,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit() as i32
        }
    }
}

fn write_out(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::Input(format!("cannot write output: {e}")))
}

fn load_backend(args: &RunArgs, config: &ExperimentConfig) -> Result<Box<dyn ChatBackend>, CliError> {
    match args.backend {
        BackendKind::Mock => {
            let path = args
                .mock_script
                .as_ref()
                .ok_or_else(|| CliError::Config("--backend mock needs --mock-script".into()))?;
            let text = fs::read_to_string(path).map_err(|e| input_err(format!("{}: {e}", path.display())))?;
            let script = MockScript::from_toml(&text).map_err(|e| input_err(format!("{}: {e}", path.display())))?;
            Ok(Box::new(MockBackend::new(script)))
        }
        BackendKind::Remote => RemoteBackend::from_env(&config.remote)
            .map(|b| Box::new(b) as Box<dyn ChatBackend>)
            .map_err(|e| CliError::Unreachable(e.to_string())),
    }
}

fn load_prices(path: &Path) -> Result<PriceTable, CliError> {
    let text = fs::read_to_string(path).map_err(|e| input_err(format!("{}: {e}", path.display())))?;
    PriceTable::from_toml(&text).map_err(|e| input_err(format!("{}: {e}", path.display())))
}

fn run_pipeline(
    config: &ExperimentConfig,
    dataset: &Dataset,
    backend: &dyn ChatBackend,
    max_concurrency: usize,
) -> Result<RunOutput, CliError> {
    let options = config.run_options(Some(max_concurrency));
    let output = match (&config.pipeline, &config.debate) {
        (Pipeline::Mad, Some(debate)) => run_mad(dataset, debate, backend, &options).map_err(|e| match e {
            DebateError::InvalidConfig(v) => CliError::from(ExperimentError::Invalid(v)),
            other => CliError::Unreachable(other.to_string()),
        })?,
        _ => run_baseline(dataset, backend, &options),
    };
    if output.backend_unreachable() {
        let first = &output.failures[0];
        return Err(CliError::Unreachable(format!("backend unreachable: {}", first.error)));
    }
    Ok(output)
}

fn run_id(config_path: &Path, started: chrono::DateTime<Utc>) -> String {
    let stem = config_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".into());
    format!("{stem}-{}", started.format("%Y%m%dT%H%M%SZ"))
}

fn cmd_run(args: &RunArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let config = ExperimentConfig::load(&args.config)?;
    config.check()?;
    let mapping = config.label_mapping()?;
    let dataset = load_dataset(&args.dataset, &mapping).map_err(input_err)?;
    let prices = args.prices.as_deref().map(load_prices).transpose()?;
    let backend = load_backend(args, &config)?;
    let backend = Limited::new(backend, InFlightLimit::new(args.max_concurrency));

    if args.dry_run {
        return dry_run(&config, &dataset, &backend, args.max_concurrency, prices.as_ref(), out);
    }

    let started = Utc::now();
    fs::create_dir_all(&args.out).map_err(|e| input_err(format!("{}: {e}", args.out.display())))?;
    // a stale manifest would make a half-written rerun look complete
    match fs::remove_file(args.out.join(MANIFEST_FILE)) {
        Err(e) if e.kind() != io::ErrorKind::NotFound => return Err(input_err(e)),
        _ => {}
    }
    let transcripts_dir = args.out.join("transcripts");
    if transcripts_dir.exists() {
        fs::remove_dir_all(&transcripts_dir).map_err(input_err)?;
    }

    let output = run_pipeline(&config, &dataset, &backend, args.max_concurrency)?;
    write_run_files(&args.out, &output)?;

    let manifest = RunManifest {
        run_id: run_id(&args.config, started),
        pipeline: config.pipeline,
        config_fingerprint: config.fingerprint(),
        dataset: DatasetInfo {
            name: dataset.name.clone(),
            items: dataset.len(),
        },
        backend: BackendInfo {
            descriptor: backend.describe(),
            model_id: config.model.model_id.clone(),
            temperature: config.model.temperature,
        },
        started_at: started,
        finished_at: Utc::now(),
        totals: output.total_usage(),
        failed_items: output.failures.len(),
    };
    manifest.write(&args.out).map_err(input_err)?;

    let parse_failures = output.records.iter().filter(|r| r.parse_failed()).count();
    let totals = manifest.totals;
    write_out(
        out,
        &format!(
            "{}: {} predictions written to {}\n  parse failures: {parse_failures}, backend failures: {}\n  tokens: {} in, {} out, {} total\n",
            manifest.run_id,
            output.records.len(),
            args.out.display(),
            output.failures.len(),
            format_thousands(totals.input_tokens),
            format_thousands(totals.output_tokens),
            format_thousands(totals.total()),
        ),
    )
}

fn write_run_files(dir: &Path, output: &RunOutput) -> Result<(), CliError> {
    let file = fs::File::create(dir.join(PREDICTIONS_FILE)).map_err(input_err)?;
    write_predictions(&output.records, io::BufWriter::new(file)).map_err(input_err)?;
    for (record, transcript) in output.records.iter().zip(&output.transcripts) {
        let path = dir.join(&record.transcript_ref);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(input_err)?;
        }
        let file = fs::File::create(&path).map_err(input_err)?;
        write_jsonl(&transcript.messages, io::BufWriter::new(file)).map_err(input_err)?;
    }
    Ok(())
}

fn dry_run(
    config: &ExperimentConfig,
    dataset: &Dataset,
    backend: &dyn ChatBackend,
    max_concurrency: usize,
    prices: Option<&PriceTable>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let probe = Dataset {
        name: dataset.name.clone(),
        items: dataset.items.iter().take(PROBE_ITEMS).cloned().collect(),
    };
    if probe.is_empty() {
        return write_out(out, "dry run: dataset is empty, nothing to estimate\n");
    }
    let usage = run_pipeline(config, &probe, backend, max_concurrency)?.total_usage();
    let estimate = extrapolate(usage, probe.len(), dataset.len());
    let mut text = format!(
        "dry run: probed {} of {} items\n  estimated tokens: {} in, {} out, {} total\n",
        probe.len(),
        dataset.len(),
        format_thousands(estimate.input_tokens),
        format_thousands(estimate.output_tokens),
        format_thousands(estimate.total()),
    );
    if let Some(prices) = prices {
        text.push_str(&format!(
            "  estimated cost: {} {}\n",
            DisplayCost(estimate_cost(estimate, prices)),
            prices.currency
        ));
    }
    write_out(out, &text)
}

/// Scales the probe's usage to `items`, rounding to the nearest token.
pub fn extrapolate(probe_usage: Usage, probe_items: usize, items: usize) -> Usage {
    let scale = |t: u64| ((t as f64 / probe_items as f64) * items as f64).round() as u64;
    Usage::new(scale(probe_usage.input_tokens), scale(probe_usage.output_tokens))
}

/// `run_dir/predictions.csv` is named after `run_dir`; any other file after its stem.
fn run_name(path: &Path) -> String {
    let named_by_dir = path.file_name().is_some_and(|n| n == PREDICTIONS_FILE);
    let source = if named_by_dir {
        path.parent().and_then(Path::file_name)
    } else {
        path.file_stem()
    };
    source
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn load_predictions(path: &Path) -> Result<Vec<crate::classify::PredictionRecord>, CliError> {
    let file = fs::File::open(path).map_err(|e| input_err(format!("{}: {e}", path.display())))?;
    read_predictions(file).map_err(|e| input_err(format!("{}: {e}", path.display())))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut json = serde_json::to_string_pretty(value).expect("report always serializes");
    json.push('\n');
    fs::write(path, json).map_err(|e| input_err(format!("{}: {e}", path.display())))
}

fn cmd_evaluate(args: &EvaluateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let records = load_predictions(&args.predictions)?;
    let report = compute_metrics(&records).map_err(|e| input_err(format!("{}: {e}", args.predictions.display())))?;
    let json_path = args
        .json
        .clone()
        .unwrap_or_else(|| args.predictions.with_file_name("metrics.json"));
    write_json(&json_path, &report)?;

    let mut text = metrics_table(&[(&run_name(&args.predictions), &report)]);
    if report.parse_failures > 0 {
        text.push_str(&format!(
            "{} parse failure(s) scored as errors\n",
            report.parse_failures
        ));
    }
    if !report.zero_division.is_empty() {
        text.push_str(&format!(
            "zero denominators (reported as 0): {}\n",
            report.zero_division.join(", ")
        ));
    }
    write_out(out, &text)
}

#[derive(Serialize)]
struct Comparison<'a> {
    a: &'a str,
    b: &'a str,
    table: ContingencyTable,
    result: McNemarResult,
}

fn cmd_compare(args: &CompareArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let a = load_predictions(&args.a)?;
    let b = load_predictions(&args.b)?;
    let table = pair_predictions(&a, &b).map_err(input_err)?;
    let result = mcnemar_with(&table, args.variant.into());
    let (name_a, name_b) = (run_name(&args.a), run_name(&args.b));
    if let Some(path) = &args.json {
        write_json(
            path,
            &Comparison {
                a: &name_a,
                b: &name_b,
                table,
                result,
            },
        )?;
    }
    let name = format!("{name_a} vs {name_b}");
    write_out(out, &mcnemar_table(&[(&name, &table, &result)]))
}

fn cmd_cost(args: &CostArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let manifest = RunManifest::read(&args.run).map_err(input_err)?;
    let records = load_predictions(&args.run.join(PREDICTIONS_FILE))?;
    let prices = load_prices(&args.prices)?;
    let report = usage_report(&records, &prices, Some(manifest.wall_time()));
    let mut text = cost_table(&[(&manifest.run_id, &report)]);
    if report.usage() != manifest.totals {
        text.push_str("warning: per-record token sums differ from the manifest totals\n");
    }
    write_out(out, &text)
}
