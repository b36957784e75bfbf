//! Batch command-line front end.
//!
//! Exit codes: 0 success, 1 usage, 2 data error, 3 numeric failure.

mod commands;
mod settings;

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::error::Error;
use crate::model::Mode;
pub use settings::{parse_config, Settings, SEED_ENV};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Run(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Run(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Run(Error::NonFinite { .. }) => 3,
            CliError::Run(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Run(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "sentopic", version, about = "Replicated Softmax topic models with a sentiment layer")]
pub struct Cli {
    /// Flat key=value file; command-line options take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build dataset directories (vocab.txt, train.docs, test.docs).
    #[command(subcommand)]
    Prepare(Prepare),
    /// Train an RS or joint model with contrastive divergence.
    Train(TrainArgs),
    /// Evaluate a trained model.
    #[command(subcommand)]
    Eval(Eval),
}

#[derive(Debug, Subcommand)]
pub enum Prepare {
    /// Sample a synthetic topic/sentiment corpus and its lexicon.
    Synth(SynthArgs),
    /// Preprocess raw `label<TAB>topic<TAB>text` lines.
    Text(TextArgs),
    /// Label documents by lexicon word counts; ties are dropped.
    Tag(TagArgs),
    /// Merge the movie-review and four product-review datasets.
    Merge(MergeArgs),
}

#[derive(Debug, Subcommand)]
pub enum Eval {
    /// Per-document log-probabilities and perplexity.
    Perplexity(PerplexityArgs),
    /// Sentiment classification against the lexicon count baseline.
    Classify(ClassifyArgs),
    /// Precision-recall of hidden-representation retrieval.
    Retrieve(RetrieveArgs),
    /// Tag hidden units as positive or negative topics.
    Topics(TopicsArgs),
    /// Warm-started versus randomly initialized MLP classifier.
    Mlp(MlpArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Vocabulary size.
    #[arg(long)]
    pub k: Option<usize>,
    /// Documents per sentiment class.
    #[arg(long)]
    pub docs: Option<usize>,
    #[arg(long)]
    pub topics: Option<usize>,
    #[arg(long)]
    pub sentiments: Option<usize>,
    #[arg(long)]
    pub min_len: Option<usize>,
    #[arg(long)]
    pub max_len: Option<usize>,
    #[arg(long)]
    pub skew: Option<f64>,
    #[arg(long)]
    pub topic_strength: Option<f64>,
    #[arg(long)]
    pub sentiment_fraction: Option<f64>,
    #[arg(long)]
    pub test_fraction: Option<f64>,
    #[arg(long)]
    pub lexicon_coverage: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct TextArgs {
    /// Raw corpus, one `label<TAB>topic<TAB>text` document per line.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Existing vocabulary; built from the input when absent.
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    #[arg(long)]
    pub vocab_size: Option<usize>,
    /// Whitespace-separated stop words replacing the bundled English list.
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    #[arg(long)]
    pub stemmer: Option<StemmerChoice>,
    #[arg(long)]
    pub test_fraction: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct TagArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MergeArgs {
    /// Movie-review dataset directory.
    #[arg(long)]
    pub mr: Option<PathBuf>,
    /// Book, DVD, electronics and kitchen dataset directories, comma-separated.
    #[arg(long)]
    pub mds: Option<PathList>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub per_class: Option<usize>,
    #[arg(long)]
    pub train_per_class: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Model file to write.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// `rs` or `joint`.
    #[arg(long)]
    pub mode: Option<Mode>,
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// `epochs` or `updates`: what one unit of --epochs counts.
    #[arg(long)]
    pub iteration_unit: Option<UnitChoice>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub batch: Option<usize>,
    #[arg(long)]
    pub cd: Option<usize>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub sentiments: Option<usize>,
    #[arg(long)]
    pub momentum: Option<f64>,
    #[arg(long)]
    pub weight_decay: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Training log CSV.
    #[arg(long)]
    pub log: Option<PathBuf>,
    /// Log metrics every this many epochs.
    #[arg(long)]
    pub probe_every: Option<usize>,
    /// Save `<out>.epoch<N>` every this many epochs (0 disables).
    #[arg(long)]
    pub checkpoint_every: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ModelData {
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// `train` or `test`.
    #[arg(long)]
    pub split: Option<SplitChoice>,
    /// CSV to write.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PerplexityArgs {
    #[command(flatten)]
    pub io: ModelData,
    /// `ais` or `exact`.
    #[arg(long)]
    pub estimator: Option<EstimatorChoice>,
    #[arg(long)]
    pub ais_runs: Option<usize>,
    #[arg(long)]
    pub ais_temps: Option<usize>,
    #[arg(long)]
    pub bootstrap: Option<usize>,
    /// `marginal` or `gold`.
    #[arg(long)]
    pub conditioning: Option<ConditioningChoice>,
    /// Estimate log Z at a few lengths and interpolate the rest.
    #[arg(long)]
    pub bucketing: Option<bool>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub io: ModelData,
    /// Lexicon for the count baseline.
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// Label given to baseline ties: `negative` or `positive`.
    #[arg(long)]
    pub tie: Option<TieChoice>,
}

#[derive(Debug, Args)]
pub struct RetrieveArgs {
    #[command(flatten)]
    pub io: ModelData,
    /// Retrieval depths, comma-separated.
    #[arg(long)]
    pub k_grid: Option<KGrid>,
}

#[derive(Debug, Args)]
pub struct TopicsArgs {
    #[command(flatten)]
    pub io: ModelData,
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MlpArgs {
    #[command(flatten)]
    pub io: ModelData,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    /// Weight scale of the randomly initialized network.
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

macro_rules! choice {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq)]
        pub enum $name {
            $($variant),+
        }

        impl FromStr for $name {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($text => Ok($name::$variant),)+
                    _ => Err(format!("unknown value {s:?}, expected one of: {}", [$($text),+].join(", "))),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self {
                    $($name::$variant => $text),+
                })
            }
        }
    };
}

choice!(StemmerChoice { Porter => "porter", Identity => "identity" });
choice!(UnitChoice { Epochs => "epochs", Updates => "updates" });
choice!(SplitChoice { Train => "train", Test => "test" });
choice!(EstimatorChoice { Ais => "ais", Exact => "exact" });
choice!(ConditioningChoice { Marginal => "marginal", Gold => "gold" });
choice!(TieChoice { Negative => "negative", Positive => "positive" });

/// Comma-separated positive integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KGrid(pub Vec<usize>);

impl FromStr for KGrid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(|x| x.trim().parse::<usize>().map_err(|e| format!("{x:?}: {e}")))
            .collect::<Result<Vec<_>, _>>()
            .map(KGrid)
    }
}

impl fmt::Display for KGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

/// Comma-separated paths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathList(pub Vec<PathBuf>);

impl FromStr for PathList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(PathList(s.split(',').map(|p| PathBuf::from(p.trim())).collect()))
    }
}

impl fmt::Display for PathList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|p| p.display().to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            log::error!("{e}");
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let mut settings = Settings::load(cli.config.as_deref())?;
    commands::dispatch(cli.command, &mut settings)
}
