//! `faceact`: corpus import, example preparation, prediction, scoring and
//! analysis for face-act tagging experiments.

mod commands;
mod config;
mod failure;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::RunConfig;
use crate::failure::Failure;

#[derive(Parser, Debug)]
#[command(name = "faceact", version, about = "Face-act tagging experiment harness")]
struct Cli {
    /// JSON run configuration; flags given on the command line take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for per-fold work.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Leave the generation time out of reports so reruns are byte-identical.
    #[arg(long, global = true)]
    no_timestamp: bool,
    #[command(subcommand)]
    command: Command,
}

/// Where the JSON report goes, and whether to print a text table instead.
#[derive(Args, Debug, Clone)]
pub struct ReportArgs {
    /// Write the JSON report here instead of standard output.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Print a plain-text table to standard output.
    #[arg(long)]
    pub text: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Convert a corpus to canonical JSONL.
    Import(ImportArgs),
    /// Build model inputs for one representation.
    Prepare(PrepareArgs),
    /// Fit one naive Bayes model per held-out fold.
    TrainBaseline(TrainArgs),
    /// Predict every test example and repair outputs onto the label set.
    Predict(PredictArgs),
    /// Per-fold and fold-averaged precision, recall and F1.
    Evaluate(EvaluateArgs),
    /// Friedman test and Kendall's W across systems.
    Compare(CompareArgs),
    /// Dialog-act by face-act correlations and the frequency-vs-F1 check.
    Correlate(CorrelateArgs),
    /// Confusion matrix over all folds.
    Confusion(ConfusionArgs),
    /// Draw misclassifications into an annotation sheet.
    SampleErrors(SampleErrorsArgs),
    /// Count reviewed error categories.
    TallyErrors(TallyErrorsArgs),
    /// Outcome shifts between two systems for one label.
    Shift(ShiftArgs),
}

#[derive(Args, Debug)]
pub struct ImportArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Delimited-format spec (JSON). Without it the input is canonical JSONL.
    #[arg(long)]
    pub format_spec: Option<PathBuf>,
    /// Extra speaker mapping, e.g. `--role Persuader=ER`.
    #[arg(long = "role", value_name = "NAME=ROLE")]
    pub roles: Vec<String>,
    /// Keep each conversation only in its lowest fold.
    #[arg(long)]
    pub dedupe: bool,
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub out: ReportArgs,
}

#[derive(Args, Debug)]
pub struct PrepareArgs {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub da_corpus: Option<PathBuf>,
    /// fos, ta, or mtl.
    #[arg(long)]
    pub variant: Option<String>,
    #[arg(long)]
    pub context_size: Option<usize>,
    #[arg(long)]
    pub sample_fraction: Option<f64>,
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub out: ReportArgs,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[arg(long)]
    pub examples: PathBuf,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub out: ReportArgs,
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    #[arg(long)]
    pub examples: PathBuf,
    /// Model bundle from train-baseline; required for the baseline predictor.
    #[arg(long)]
    pub models: Option<PathBuf>,
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub out: ReportArgs,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub gold: Option<PathBuf>,
    #[command(flatten)]
    pub out: ReportArgs,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    F1,
    Precision,
    Recall,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    /// Blocks are labels; values come from the fold-averaged reports.
    Label,
    /// Blocks are folds; values are the fold's macro score.
    Fold,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    /// Evaluate reports, one per system.
    #[arg(long, num_args = 2.., required = true)]
    pub reports: Vec<PathBuf>,
    /// System names, in report order; defaults to file stems.
    #[arg(long, num_args = 1..)]
    pub names: Vec<String>,
    #[arg(long, value_enum, default_value = "f1")]
    pub metric: Metric,
    #[arg(long, value_enum, default_value = "label")]
    pub level: Level,
    #[command(flatten)]
    pub out: ReportArgs,
}

#[derive(Args, Debug)]
pub struct CorrelateArgs {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Merge tags through the tagset's collapse map first.
    #[arg(long)]
    pub collapse: bool,
    /// Evaluate report whose per-label F1 is correlated with label counts.
    #[arg(long)]
    pub f1_report: Option<PathBuf>,
    #[command(flatten)]
    pub out: ReportArgs,
}

#[derive(Args, Debug)]
pub struct ConfusionArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub gold: Option<PathBuf>,
    #[command(flatten)]
    pub out: ReportArgs,
}

#[derive(Args, Debug)]
pub struct SampleErrorsArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub gold: Option<PathBuf>,
    #[arg(long)]
    pub per_fold: Option<usize>,
    #[arg(long)]
    pub cap: Option<usize>,
    /// Annotation sheet (TSV) to write.
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub out: ReportArgs,
}

#[derive(Args, Debug)]
pub struct TallyErrorsArgs {
    #[arg(long)]
    pub sheet: PathBuf,
    #[command(flatten)]
    pub out: ReportArgs,
}

#[derive(Args, Debug)]
pub struct ShiftArgs {
    #[arg(long)]
    pub gold: Option<PathBuf>,
    #[arg(long)]
    pub pred_a: PathBuf,
    #[arg(long)]
    pub pred_b: PathBuf,
    #[arg(long)]
    pub target: String,
    /// Dialog-act tags to count, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "all_tags")]
    pub tags: Option<Vec<String>>,
    /// Count every collapsed tag.
    #[arg(long)]
    pub all_tags: bool,
    #[command(flatten)]
    pub out: ReportArgs,
}

/// Global options after merging the config file and flags.
pub struct Context {
    pub config: RunConfig,
    pub timestamp: bool,
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(jobs) = cli.jobs {
        config.jobs = jobs;
    }
    let mut ctx = Context {
        config,
        timestamp: !cli.no_timestamp,
    };
    match cli.command {
        Command::Import(args) => commands::import(&mut ctx, args),
        Command::Prepare(args) => commands::prepare(&mut ctx, args),
        Command::TrainBaseline(args) => commands::train_baseline(&mut ctx, args),
        Command::Predict(args) => commands::predict(&mut ctx, args),
        Command::Evaluate(args) => commands::evaluate(&mut ctx, args),
        Command::Compare(args) => commands::compare(&mut ctx, args),
        Command::Correlate(args) => commands::correlate(&mut ctx, args),
        Command::Confusion(args) => commands::confusion(&mut ctx, args),
        Command::SampleErrors(args) => commands::sample_errors(&mut ctx, args),
        Command::TallyErrors(args) => commands::tally_errors(&mut ctx, args),
        Command::Shift(args) => commands::shift(&mut ctx, args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Help and version requests are not failures; usage errors are
            // validation errors.
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.code as u8)
        }
    }
}
