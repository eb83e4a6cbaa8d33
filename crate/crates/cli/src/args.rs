use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "repdetect", version, about, args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Filter, trim, merge and split corpora into the JSONL format.
    Ingest(IngestArgs),
    /// Generate a synthetic corpus from a Markov model.
    Synth(SynthArgs),
    /// Dump the super-maximal repeats of a corpus.
    Repeats(RepeatsArgs),
    /// Rank documents by ensemble votes.
    Detect(DetectArgs),
    /// Evaluate an existing ranking against gold labels.
    Eval(EvalArgs),
    /// Per-source histograms of lexical diversity.
    Diversity(DiversityArgs),
    /// Train one classifier on the top of a ranking.
    FullClassify(FullClassifyArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Flat `key = value` file with defaults for any flag of this command.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormatArg {
    Jsonl,
    TxtDir,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelArg {
    Human,
    Machine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyArg {
    Greedy,
    Ancestral,
    Topk,
    Nucleus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    Unsupervised,
    Semi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrainModeArg {
    Sgd,
    FullBatch,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MinerArgs {
    /// Minimum repeat length in characters.
    #[arg(long, default_value_t = 20)]
    pub min_len: usize,
    /// Minimum number of occurrences.
    #[arg(long, default_value_t = 3)]
    pub min_occ: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ClassifierArgs {
    #[arg(long, default_value_t = 3)]
    pub ngram_min: usize,
    #[arg(long, default_value_t = 5)]
    pub ngram_max: usize,
    /// Feature space is 2^hash-bits.
    #[arg(long, default_value_t = 18)]
    pub hash_bits: u32,
    #[arg(long, default_value_t = 10)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.1)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub l2: f64,
    #[arg(long, value_enum, default_value_t = TrainModeArg::Sgd)]
    pub train_mode: TrainModeArg,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct IngestArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// Input corpora, merged in order.
    #[arg(long, required = true, value_delimiter = ',')]
    pub input: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Jsonl)]
    pub format: FormatArg,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub min_chars: usize,
    /// Truncate documents to this many characters (0 keeps full text).
    #[arg(long, default_value_t = 0)]
    pub trim_chars: usize,
    /// Label given to documents that have none.
    #[arg(long, value_enum)]
    pub default_label: Option<LabelArg>,
    /// Fraction of human documents moved to `--holdout-output`.
    #[arg(long, default_value_t = 0.0)]
    pub holdout_fraction: f64,
    #[arg(long)]
    pub holdout_output: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SynthArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// Plain-text training material; a generated toy language is used when
    /// absent.
    #[arg(long)]
    pub training: Option<PathBuf>,
    #[arg(long, default_value_t = 2000)]
    pub toy_vocab: usize,
    #[arg(long, default_value_t = 1_000_000)]
    pub toy_tokens: usize,
    #[arg(long, default_value_t = 1)]
    pub order: usize,
    #[arg(long, default_value_t = 0.0)]
    pub smoothing: f64,
    #[arg(long, value_enum, default_value_t = StrategyArg::Topk)]
    pub strategy: StrategyArg,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, default_value_t = 0.8)]
    pub p: f64,
    #[arg(long, default_value_t = 1000)]
    pub n_docs: usize,
    /// Generated tokens per document, prompt excluded.
    #[arg(long, default_value_t = 60)]
    pub doc_len: usize,
    /// Prompt length in tokens (defaults to the model order).
    #[arg(long)]
    pub prompt_len: Option<usize>,
    /// Document id prefix (defaults to the strategy name and a dash).
    #[arg(long)]
    pub id_prefix: Option<String>,
    #[arg(long, value_enum, default_value_t = LabelArg::Machine)]
    pub label: LabelArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RepeatsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Jsonl)]
    pub format: FormatArg,
    #[arg(long)]
    pub output_dir: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub miner: MinerArgs,
    /// Histogram bucket width in characters.
    #[arg(long, default_value_t = 5)]
    pub bucket_width: usize,
    /// Reuse or create a suffix-array cache at this path.
    #[arg(long)]
    pub index_cache: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DetectArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Jsonl)]
    pub format: FormatArg,
    #[arg(long)]
    pub output_dir: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Unsupervised)]
    pub mode: ModeArg,
    /// Human collection for semi-supervised negatives.
    #[arg(long)]
    pub holdout: Option<PathBuf>,
    /// Without `--holdout`, semi-supervised mode moves this fraction of the
    /// gold human documents out of the corpus and uses them as negatives.
    #[arg(long, default_value_t = 0.05)]
    pub holdout_fraction: f64,
    /// Number of classifiers.
    #[arg(long, default_value_t = 30)]
    pub k_experts: usize,
    #[arg(long, default_value_t = 20)]
    pub repeats_per_round: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub miner: MinerArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub classifier: ClassifierArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Cutoffs for the precision curve.
    #[arg(long, value_delimiter = ',', default_values_t = default_cutoffs())]
    pub precision_at: Vec<usize>,
    #[arg(long, default_value_t = 0.02)]
    pub diversity_width: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvalArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// `ranking.jsonl` written by `detect`.
    #[arg(long)]
    pub ranking: PathBuf,
    /// The ranked corpus, with gold labels.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Jsonl)]
    pub format: FormatArg,
    #[arg(long)]
    pub output_dir: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub miner: MinerArgs,
    #[arg(long, value_delimiter = ',', default_values_t = default_cutoffs())]
    pub precision_at: Vec<usize>,
    #[arg(long, default_value_t = 0.02)]
    pub diversity_width: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DiversityArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Jsonl)]
    pub format: FormatArg,
    /// CSV output with one row per (source, bucket).
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 0.02)]
    pub bucket_width: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FullClassifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// The ranked corpus.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub ranking: PathBuf,
    /// Gold human documents used as negatives.
    #[arg(long)]
    pub human: PathBuf,
    /// Labeled held-out test set.
    #[arg(long)]
    pub test: PathBuf,
    /// Positive-set sizes; one model per value.
    #[arg(long, value_delimiter = ',', default_values_t = vec![200])]
    pub top_n: Vec<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub classifier: ClassifierArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output_dir: PathBuf,
}

fn default_cutoffs() -> Vec<usize> {
    vec![10, 50, 100, 200, 500, 1000, 2000, 5000]
}
