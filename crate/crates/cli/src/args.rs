use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "topic-embed",
    version,
    about = "Correlated topic modeling with topic embeddings"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train the embedding topic model.
    Train(TrainArgs),
    /// Train the LDA baseline with the same corpus, schedule, and outputs.
    Lda(TrainArgs),
    /// Held-out per-word log-likelihood and retrieval precision/recall.
    Eval(EvalArgs),
    /// Topic embeddings, correlations, and the correlation graph.
    Export(ExportArgs),
}

/// Hyperparameters are taken as text so that every bad value can be
/// reported in one go.
#[derive(Debug, Args)]
pub struct TrainArgs {
    /// UCI docword file.
    #[arg(long)]
    pub docword: PathBuf,
    /// Vocabulary, one word per line.
    #[arg(long)]
    pub vocab: PathBuf,
    /// Document labels, one integer per line.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// `key=value` lines; flags override them.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of topics (required).
    #[arg(long, allow_negative_numbers = true)]
    pub k: Option<String>,
    /// Embedding dimension.
    #[arg(long, allow_negative_numbers = true)]
    pub m: Option<String>,
    /// Precision of the topic embedding prior.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<String>,
    /// Dirichlet prior on topic words (default 1/K).
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<String>,
    /// Precision of the document embedding prior.
    #[arg(long, allow_negative_numbers = true)]
    pub rho: Option<String>,
    /// Precision of the topic weights around their embedding mean.
    #[arg(long, allow_negative_numbers = true)]
    pub tau: Option<String>,
    /// Topics kept per document when sampling.
    #[arg(long, allow_negative_numbers = true)]
    pub ks: Option<String>,
    /// Words kept per topic.
    #[arg(long, allow_negative_numbers = true)]
    pub vs: Option<String>,
    /// Minimum topics retaining each word.
    #[arg(long, allow_negative_numbers = true)]
    pub smin: Option<String>,
    /// Minibatch size.
    #[arg(long, allow_negative_numbers = true)]
    pub batch: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub seed: Option<String>,
    /// Share of documents held out for the stopping criterion (0 disables).
    #[arg(long, allow_negative_numbers = true)]
    pub test_frac: Option<String>,
    /// Epoch limit.
    #[arg(long, allow_negative_numbers = true)]
    pub max_epochs: Option<String>,
    /// Stop when the held-out per-word log-likelihood changes less than this.
    #[arg(long, allow_negative_numbers = true)]
    pub tol: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads; 0 uses every core, 1 is bit-reproducible everywhere.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
}

impl TrainArgs {
    /// Hyperparameter flags that were given, as config keys.
    pub fn overrides(&self) -> Vec<(&'static str, &str)> {
        [
            ("k", &self.k),
            ("m", &self.m),
            ("alpha", &self.alpha),
            ("beta", &self.beta),
            ("rho", &self.rho),
            ("tau", &self.tau),
            ("ks", &self.ks),
            ("vs", &self.vs),
            ("smin", &self.smin),
            ("batch", &self.batch),
            ("seed", &self.seed),
            ("test_frac", &self.test_frac),
            ("max_epochs", &self.max_epochs),
            ("tol", &self.tol),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.as_deref().map(|v| (k, v)))
        .collect()
    }
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Documents to score (queries for retrieval).
    #[arg(long)]
    pub docword: PathBuf,
    #[arg(long)]
    pub vocab: PathBuf,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// `split.txt` from a training run: score only its held-out documents and
    /// retrieve from the rest.
    #[arg(long)]
    pub split: Option<PathBuf>,
    /// Retrieval base corpus, when not taken from `--split`.
    #[arg(long)]
    pub base_docword: Option<PathBuf>,
    #[arg(long)]
    pub base_labels: Option<PathBuf>,
    /// Compute precision/recall (needs labels).
    #[arg(long)]
    pub retrieval: bool,
    #[arg(long, value_delimiter = ',', default_value = "1,2,5,10,20,50,100")]
    pub cutoffs: Vec<usize>,
    /// The model is an LDA baseline.
    #[arg(long)]
    pub baseline: bool,
    /// Also write document features of the scored documents.
    #[arg(long)]
    pub features: bool,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Vocabulary for topic labels; ids are used without it.
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    /// Keep edges with correlation at least this.
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub threshold: f64,
    /// Label words per topic.
    #[arg(long, default_value_t = 10)]
    pub top_words: usize,
    /// Strongest edges kept per topic.
    #[arg(long, default_value_t = usize::MAX, hide_default_value = true)]
    pub max_degree: usize,
    #[arg(long)]
    pub out: PathBuf,
}
