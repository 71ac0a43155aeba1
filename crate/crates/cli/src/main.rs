use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tmfusion::sampling::StrategyKind;

mod commands;
mod config;
mod output;

/// Weighted Tsetlin Machine experiments: data generation, training,
/// description comparison, inconsistency localization and oversampling.
#[derive(Debug, Parser)]
#[command(name = "tmfusion", version)]
pub struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset.
    Gen(GenArgs),
    /// Turn a numeric CSV into binary features.
    Binarize(BinarizeArgs),
    /// Train a model and save it.
    Train(TrainArgs),
    /// Accuracy, macro precision, recall and F-score of a model on a dataset.
    Eval(EvalArgs),
    /// Per-row decision traces and the data/model compatibility table.
    Trace(TraceArgs),
    /// Compare the global descriptions of two models.
    Compare(CompareArgs),
    /// Localize inconsistent rows by training on overlapping cuts.
    Cuts(CutsArgs),
    /// Oversample the minority class, optionally guided by split grades.
    Oversample(OversampleArgs),
    /// Grade stratified splits by mean ASD.
    Grade(GradeArgs),
}

/// Model hyperparameters; each overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    /// Clauses per class (even).
    #[arg(long)]
    pub clauses: Option<usize>,
    /// Voting target T.
    #[arg(long)]
    pub threshold: Option<u32>,
    /// Specificity s (> 1).
    #[arg(long)]
    pub specificity: Option<f64>,
    /// States per automaton action.
    #[arg(long)]
    pub ta_states: Option<u32>,
    /// Always reward included true literals.
    #[arg(long)]
    pub boost: bool,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Task {
    /// Hat passing over a line of persons.
    Hat,
    /// Pass/neighbour query tasks.
    Query,
    /// Noisy copies of class prototypes.
    Prototype,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum QueryKindArg {
    Neighbour,
    ValidPass,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub task: Task,
    /// Rows to generate (hat and query tasks).
    #[arg(long, default_value_t = 1000)]
    pub count: usize,
    #[arg(long, default_value_t = 4)]
    pub persons: usize,
    #[arg(long, default_value_t = 3)]
    pub steps: usize,
    /// Hat task: share of rows given an invalid end-person pass.
    #[arg(long, default_value_t = 0.0)]
    pub inject_rate: f64,
    #[arg(long, value_enum, default_value = "neighbour")]
    pub query_kind: QueryKindArg,
    /// Query task: share of target-pair queries that contradict the world rule.
    #[arg(long, default_value_t = 0.0)]
    pub contradiction_rate: f64,
    /// Prototype task: number of binary features.
    #[arg(long, default_value_t = 20)]
    pub features: usize,
    /// Prototype task: rows per class.
    #[arg(long, value_delimiter = ',', default_value = "500,500")]
    pub counts: Vec<usize>,
    /// Prototype task: per-bit flip probability.
    #[arg(long, default_value_t = 0.2)]
    pub flip: f64,
    /// Prototype task: share of rows with a wrong label.
    #[arg(long, default_value_t = 0.0)]
    pub label_noise: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BinarizeMethod {
    /// One-hot percentile bins.
    Percentile,
    /// One bit per feature: above the training mean.
    Mean,
}

#[derive(Debug, Args)]
pub struct BinarizeArgs {
    /// Numeric CSV with a header row; a `label` column is kept as labels.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "percentile")]
    pub method: BinarizeMethod,
    #[arg(long, default_value_t = 10)]
    pub bins: usize,
    /// Fit edges or means on this CSV instead of the input.
    #[arg(long)]
    pub fit_on: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Write the report as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Per-row trace CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Baseline model.
    #[arg(long)]
    pub model_a: PathBuf,
    #[arg(long)]
    pub model_b: PathBuf,
    /// Overlap below this means the description changed.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Jaccard needed for two clauses to count as the same pattern.
    #[arg(long)]
    pub match_threshold: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CutsArgs {
    /// Model trained on the trusted data.
    #[arg(long)]
    pub baseline: PathBuf,
    /// Data to examine.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub cuts: Option<usize>,
    /// Share of rows in each cut.
    #[arg(long)]
    pub fraction: Option<f64>,
    /// Lowest-scoring cuts to try removing.
    #[arg(long)]
    pub remove: Option<usize>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Split layout shared by grading and oversampling.
#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub repeats: Option<usize>,
    /// Score split models on this dataset instead of the other folds.
    #[arg(long)]
    pub holdout: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OversampleArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_parser = parse_strategy)]
    pub strategy: Option<StrategyKind>,
    /// Target minority/majority ratio.
    #[arg(long)]
    pub ratio: Option<f64>,
    #[arg(long)]
    pub neighbors: Option<usize>,
    #[command(flatten)]
    pub split: SplitArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GradeArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub split: SplitArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_strategy(s: &str) -> Result<StrategyKind, String> {
    s.parse().map_err(|_| {
        let names: Vec<&str> = StrategyKind::ALL.iter().map(|k| k.name()).collect();
        format!("expected one of {}", names.join(", "))
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
