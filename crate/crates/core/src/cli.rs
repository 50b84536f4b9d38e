//! Batch command-line front end.
//!
//! Exit codes: 0 on success, 1 on data or numeric failure, 2 on usage or
//! configuration errors.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::dataset::{self, LabelColumn, MixtureMode};
use crate::error::Error;
use crate::eval::{self, EvalConfig, MixtureSource, RecoveryConfig, StabilityConfig};
use crate::json;
use crate::ranking::{self, Method, MethodRanker, RankParams};
use crate::Dataset;

#[derive(Debug, Parser)]
#[command(name = "featgraph", version, about = "Graph-based feature ranking")]
pub struct Cli {
    /// Worker threads for independent trials; results do not depend on it.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rank the features of a CSV file.
    Rank(RankArgs),
    /// Held-out AUC against the number of selected features.
    Eval(EvalArgs),
    /// Kuncheva stability of the top-k subset across subsamples.
    Stability(StabilityArgs),
    /// Generate a synthetic base-plus-mixture dataset.
    Synth(SynthArgs),
    /// Mixture-recovery experiment over the bundled Iris features.
    DemoIris(DemoIrisArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CliMethod {
    InfsUnsup,
    InfsSup,
    Ecfs,
    Fisher,
    Mi,
}

impl From<CliMethod> for Method {
    fn from(m: CliMethod) -> Self {
        match m {
            CliMethod::InfsUnsup => Method::InfsUnsup,
            CliMethod::InfsSup => Method::InfsSup,
            CliMethod::Ecfs => Method::Ecfs,
            CliMethod::Fisher => Method::Fisher,
            CliMethod::Mi => Method::Mi,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CliMode {
    Linear,
    Periodic,
}

impl From<CliMode> for MixtureMode {
    fn from(m: CliMode) -> Self {
        match m {
            CliMode::Linear => MixtureMode::Linear,
            CliMode::Periodic => MixtureMode::Periodic,
        }
    }
}

#[derive(Debug, Args)]
struct InputArgs {
    /// CSV file, comma separated, optional header row.
    #[arg(long)]
    input: PathBuf,

    /// Label column, by header name or 0-based index.
    #[arg(long = "label-col")]
    label_col: Option<String>,
}

#[derive(Debug, Args)]
struct MethodArgs {
    #[arg(long, value_enum, default_value = "infs-unsup")]
    method: CliMethod,

    /// Loading coefficient in [0, 1]; 0.2 when omitted.
    #[arg(long)]
    alpha: Option<f64>,

    /// Histogram bins for mutual information.
    #[arg(long, default_value_t = crate::stats::DEFAULT_BINS)]
    bins: usize,
}

#[derive(Debug, Args)]
struct RankArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    method: MethodArgs,
    /// Number of feature names printed to stdout.
    #[arg(long, default_value_t = 10)]
    top: usize,
    /// Ranking JSON destination.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    method: MethodArgs,
    /// Comma-separated numbers of top features to evaluate.
    #[arg(long, value_delimiter = ',', required = true)]
    cardinalities: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report JSON destination; the AUC table goes next to it as `.csv`.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct StabilityArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    method: MethodArgs,
    /// Size of the compared top-k subsets.
    #[arg(long, default_value_t = 10)]
    top: usize,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Share of samples kept in each resample.
    #[arg(long, default_value_t = 2.0 / 3.0)]
    fraction: f64,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 150)]
    samples: usize,
    #[arg(long = "n-base", default_value_t = 4)]
    n_base: usize,
    #[arg(long = "n-mix", default_value_t = 16)]
    n_mix: usize,
    #[arg(long, value_enum, default_value = "linear")]
    mode: CliMode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Dataset CSV destination; the manifest goes next to it as
    /// `<stem>.manifest.json`.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct DemoIrisArgs {
    #[arg(long, value_enum, default_value = "linear")]
    mode: CliMode,
    #[arg(long, value_enum, default_value = "infs-unsup")]
    method: CliMethod,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = crate::stats::DEFAULT_BINS)]
    bins: usize,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Runtime(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if cli.jobs == 0 {
        eprintln!("error: --jobs must be at least 1");
        return 2;
    }
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return 1;
        }
    };
    match pool.install(|| execute(&cli.command)) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn execute(command: &Command) -> CliResult<()> {
    match command {
        Command::Rank(args) => cmd_rank(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Stability(args) => cmd_stability(args),
        Command::Synth(args) => cmd_synth(args),
        Command::DemoIris(args) => cmd_demo_iris(args),
    }
}

fn rank_params(alpha: Option<f64>, bins: usize) -> CliResult<RankParams> {
    let alpha = alpha.unwrap_or(ranking::DEFAULT_ALPHA);
    if !(0.0..=1.0).contains(&alpha) {
        return usage(format!("--alpha must lie in [0, 1], got {alpha}"));
    }
    if bins < 2 {
        return usage(format!("--bins must be at least 2, got {bins}"));
    }
    Ok(RankParams {
        alpha,
        bins,
        ..RankParams::default()
    })
}

fn ranker(args: &MethodArgs, input: &InputArgs) -> CliResult<MethodRanker> {
    let method = Method::from(args.method);
    if method.is_supervised() && input.label_col.is_none() {
        return usage(format!(
            "--method {} needs class labels: pass --label-col",
            method.as_str().replace('_', "-")
        ));
    }
    Ok(MethodRanker::new(method, rank_params(args.alpha, args.bins)?))
}

fn load(input: &InputArgs) -> CliResult<Dataset> {
    let label = input
        .label_col
        .as_deref()
        .map(|l| l.parse::<LabelColumn>().expect("infallible"));
    Ok(dataset::load_csv(&input.input, label.as_ref())?)
}

fn check_trials(trials: usize, min: usize) -> CliResult<()> {
    if trials < min {
        return usage(format!("--trials must be at least {min}, got {trials}"));
    }
    Ok(())
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn cmd_rank(args: &RankArgs) -> CliResult<()> {
    let ranker = ranker(&args.method, &args.input)?;
    let data = load(&args.input)?;
    let ranking = ranking::rank_with_method(&data, ranker.method, &ranker.params)?;
    json::write_sorted(&args.output, &RankingDocument::from(&ranking))?;
    for (pos, &feature) in ranking.top(args.top).iter().enumerate() {
        println!("{}\t{}\t{}", pos + 1, data.feature_names()[feature], ranking.scores[feature]);
    }
    Ok(())
}

/// On-disk ranking layout, carrying the schema version.
#[derive(serde::Serialize)]
struct RankingDocument<'a> {
    schema: &'static str,
    #[serde(flatten)]
    ranking: &'a ranking::Ranking,
}

impl<'a> From<&'a ranking::Ranking> for RankingDocument<'a> {
    fn from(ranking: &'a ranking::Ranking) -> Self {
        Self { schema: "1", ranking }
    }
}

fn cmd_eval(args: &EvalArgs) -> CliResult<()> {
    let ranker = ranker(&args.method, &args.input)?;
    check_trials(args.trials, 1)?;
    if args.input.label_col.is_none() {
        return usage("eval needs class labels: pass --label-col");
    }
    let data = load(&args.input)?;
    let n = data.n_features();
    if let Some(&m) = args.cardinalities.iter().find(|&&m| m == 0 || m > n) {
        return usage(format!("--cardinalities entry {m} outside 1..={n}"));
    }
    let config = EvalConfig::new(args.cardinalities.clone(), args.trials, args.seed);
    let report = eval::eval_pipeline(&data, &ranker, &config)?;
    json::write_sorted(&args.output, &report)?;
    report.write_csv(args.output.with_extension("csv"))?;
    for (m, auc) in report.cardinalities.iter().zip(&report.auc_mean) {
        println!("{m}\t{auc:.4}");
    }
    Ok(())
}

fn cmd_stability(args: &StabilityArgs) -> CliResult<()> {
    let ranker = ranker(&args.method, &args.input)?;
    check_trials(args.trials, 2)?;
    if !(args.fraction > 0.0 && args.fraction <= 1.0) {
        return usage(format!("--fraction must lie in (0, 1], got {}", args.fraction));
    }
    let data = load(&args.input)?;
    if args.top == 0 || args.top >= data.n_features() {
        return usage(format!("--top must lie in 1..{}", data.n_features()));
    }
    let config = StabilityConfig {
        fraction: args.fraction,
        ..StabilityConfig::new(args.top, args.trials, args.seed)
    };
    let report = eval::stability_experiment(&data, &ranker, &config)?;
    json::write_sorted(&args.output, &report)?;
    println!("kuncheva mean {:.4} std {:.4}", report.mean, report.std);
    Ok(())
}

fn cmd_synth(args: &SynthArgs) -> CliResult<()> {
    if args.samples < 2 || args.n_base < 2 {
        return usage("--samples and --n-base must be at least 2");
    }
    let mixture = dataset::gen_mixture_dataset(args.samples, args.n_base, args.n_mix, args.mode.into(), args.seed)?;
    mixture.data.write_csv(&args.output)?;
    json::write_sorted(sibling(&args.output, ".manifest.json"), &mixture.manifest)?;
    println!(
        "{} samples, {} features ({} base)",
        mixture.data.n_samples(),
        mixture.data.n_features(),
        args.n_base
    );
    Ok(())
}

fn cmd_demo_iris(args: &DemoIrisArgs) -> CliResult<()> {
    check_trials(args.trials, 1)?;
    let method = Method::from(args.method);
    let ranker = MethodRanker::new(method, rank_params(args.alpha, args.bins)?);
    let config = RecoveryConfig::new(
        MixtureSource::Base(dataset::load_iris()),
        args.mode.into(),
        args.trials,
        args.seed,
    );
    let report = eval::mixture_recovery(&ranker, &config)?;
    json::write_sorted(&args.output, &report)?;
    println!(
        "{} mixtures: base features ranked ahead in {}/{} trials",
        report.mode, report.trials_base_better, report.trial_count
    );
    Ok(())
}
