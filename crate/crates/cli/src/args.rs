use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "clarity", version, about = "Question-answer clarity classification pipeline")]
pub struct Cli {
    /// `key = value` config file; flags override it, it overrides defaults.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load a labeled file and write stratified train/dev splits.
    Prepare(PrepareArgs),
    /// Generate minority-class records for a training split.
    Augment(AugmentArgs),
    /// Fine-tune the classifier and save the best checkpoint.
    Train(TrainArgs),
    /// Write predictions for a file with a saved checkpoint.
    Predict(PredictArgs),
    /// Score predictions against gold labels.
    Evaluate(EvaluateArgs),
    /// Fit and score a reference model.
    Baseline(BaselineArgs),
    /// Render reports from stored confusion matrices.
    Report(ReportArgs),
    /// Learning-rate × layer-decay grid on one train/dev split.
    Grid(GridArgs),
}

#[derive(Debug, Args)]
pub struct PrepareArgs {
    #[arg(long)]
    pub train: PathBuf,
    /// Held-out file to normalize and mark as test data.
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub dev_fraction: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AugmentMode {
    FullBalance,
    Partial,
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum)]
    pub mode: Option<AugmentMode>,
    /// Provenance of the generated records: frame (default) or paraphrase.
    #[arg(long)]
    pub source: Option<String>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub dev: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Encoder identifier or checkpoint directory.
    #[arg(long)]
    pub model_id: Option<String>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Checkpoint directory written by `train`.
    #[arg(long)]
    pub model_id: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Labeled records.
    #[arg(long, alias = "test")]
    pub gold: PathBuf,
    /// `id<TAB>label` predictions.
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value = "clarity")]
    pub task: String,
    #[arg(long, default_value = "text")]
    pub format: String,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    /// Comma-separated baseline names, or `all`.
    #[arg(long)]
    pub kind: String,
    #[arg(long)]
    pub train: PathBuf,
    /// Needed by the fine-tuned transformer baselines.
    #[arg(long)]
    pub dev: Option<PathBuf>,
    #[arg(long)]
    pub test: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Backbone for the transformer baselines (e.g. an offline checkpoint).
    #[arg(long)]
    pub model_id: Option<String>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Matrix files written by `evaluate` or `baseline`.
    #[arg(long = "matrix")]
    pub matrices: Vec<PathBuf>,
    /// Directory of `baseline` output to compare against published scores.
    #[arg(long)]
    pub baselines: Option<PathBuf>,
    /// Reorder matrix labels, e.g. `Ambivalent,Clear Reply,Clear Non-Reply`.
    #[arg(long)]
    pub order: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value = "markdown")]
    pub format: String,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub dev: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub model_id: Option<String>,
}
