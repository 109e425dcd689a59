use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use topic_embedding::corpus::{load_labels, load_uci_bow, split_indices, Corpus};
use topic_embedding::evaluation::{
    document_embeddings, heldout_perword_ll_with, retrieval_pr, topic_top_words, write_features,
};
use topic_embedding::export::{
    correlation_graph, covariance_matrix, export_embeddings, export_graph, MAX_DENSE_TOPICS,
};
use topic_embedding::inference::{train as train_model, TraceRow};
use topic_embedding::lda::{lda_features, lda_heldout_ll_with, lda_train, load_lda, save_lda, LdaState};
use topic_embedding::model::{load_model, save_model, GlobalState, ModelConfig};
use topic_embedding::parallel::Executor;
use topic_embedding::Error;

use crate::args::{EvalArgs, ExportArgs, TrainArgs};
use crate::error::{io_error, CliError};
use crate::manifest::RunManifest;
use crate::settings::{read_config_file, resolve};

pub const MODEL_FILE: &str = "model.txt";
pub const TRACE_FILE: &str = "trace.tsv";
pub const SPLIT_FILE: &str = "split.txt";
pub const CONFIG_FILE: &str = "config.txt";
pub const METRICS_FILE: &str = "metrics.tsv";
pub const PR_FILE: &str = "pr.tsv";
pub const FEATURES_FILE: &str = "features.txt";

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| io_error(path, e))
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))
}

fn load_corpus(
    docword: &Path,
    vocab: &Path,
    labels: Option<&Path>,
    manifest: &mut RunManifest,
    prefix: &str,
) -> Result<Corpus, CliError> {
    let mut corpus = load_uci_bow(docword, vocab)?;
    manifest.input(&format!("{prefix}docword"), docword)?;
    manifest.input(&format!("{prefix}vocab"), vocab)?;
    if let Some(path) = labels {
        load_labels(path, &mut corpus)?;
        manifest.input(&format!("{prefix}labels"), path)?;
    }
    Ok(corpus)
}

fn trace_text(trace: &[TraceRow]) -> String {
    let mut out = String::from("iteration\trate\theldout_ll\n");
    for row in trace {
        let _ = writeln!(out, "{}\t{:e}\t{:.6}", row.iteration, row.rate, row.heldout_ll);
    }
    out
}

#[derive(Clone, Copy, PartialEq)]
enum ModelFamily {
    Embedding,
    Lda,
}

pub fn train(args: &TrainArgs) -> Result<(), CliError> {
    fit(args, ModelFamily::Embedding)
}

pub fn lda(args: &TrainArgs) -> Result<(), CliError> {
    fit(args, ModelFamily::Lda)
}

/// Resolve settings, split, train, and write the model, trace, split,
/// resolved config, and manifest into `--out`.
fn fit(args: &TrainArgs, family: ModelFamily) -> Result<(), CliError> {
    let name = if family == ModelFamily::Lda { "lda" } else { "train" };
    let mut manifest = RunManifest::new(name, args.workers);
    let file = match &args.config {
        Some(path) => {
            let pairs = read_config_file(path)?;
            manifest.input("config", path)?;
            pairs
        }
        None => Vec::new(),
    };
    let settings = resolve(&file, &args.overrides())?;
    let config = &settings.model;
    let corpus = load_corpus(&args.docword, &args.vocab, args.labels.as_deref(), &mut manifest, "")?;
    config
        .validate_for_vocab(corpus.num_words())
        .map_err(CliError::Config)?;
    let executor = Executor::new(args.workers)?;

    let (train_idx, test_idx) = if settings.test_frac > 0.0 {
        split_indices(corpus.num_docs(), settings.test_frac, config.seed)?
    } else {
        ((0..corpus.num_docs()).collect(), Vec::new())
    };
    let train_docs = corpus.subset(&train_idx);
    let test_docs = corpus.subset(&test_idx);
    let heldout = (!test_idx.is_empty()).then_some(&test_docs);
    manifest.seed = Some(config.seed);
    manifest.set_config(settings.entries());
    manifest.phase("load");

    create_dir(&args.out)?;
    let model_path = args.out.join(MODEL_FILE);
    let (trace, converged) = match family {
        ModelFamily::Embedding => {
            let out = train_model(&train_docs, heldout, config, &executor)?;
            manifest.phase("train");
            save_model(&out.state, config, &model_path)?;
            (out.trace, out.converged)
        }
        ModelFamily::Lda => {
            let out = lda_train(&train_docs, heldout, config, &executor)?;
            manifest.phase("train");
            save_lda(&out.state, config, &model_path)?;
            (out.trace, out.converged)
        }
    };

    let trace_path = args.out.join(TRACE_FILE);
    write_file(&trace_path, &trace_text(&trace))?;
    let split_path = args.out.join(SPLIT_FILE);
    let mut split = String::from("# held-out document indices (0-based)\n");
    for i in &test_idx {
        let _ = writeln!(split, "{i}");
    }
    write_file(&split_path, &split)?;
    let config_path = args.out.join(CONFIG_FILE);
    write_file(&config_path, &settings.to_config_text())?;

    for (role, path) in [
        ("model", &model_path),
        ("trace", &trace_path),
        ("split", &split_path),
        ("config", &config_path),
    ] {
        manifest.output(role, path)?;
    }
    manifest.note("train_docs", train_idx.len());
    manifest.note("heldout_docs", test_idx.len());
    manifest.note("converged", converged);
    manifest.note("trace_seconds", trace.iter().map(|r| r.seconds).collect::<Vec<_>>());
    manifest.phase("write");
    manifest.write(&args.out)
}

enum LoadedModel {
    Embedding(GlobalState, ModelConfig),
    Lda(LdaState, ModelConfig),
}

impl LoadedModel {
    fn num_words(&self) -> usize {
        match self {
            LoadedModel::Embedding(s, _) => s.num_words(),
            LoadedModel::Lda(s, _) => s.words.num_words(),
        }
    }

    fn heldout_ll(&self, test: &Corpus, executor: &Executor) -> Result<f64, CliError> {
        Ok(match self {
            LoadedModel::Embedding(s, c) => heldout_perword_ll_with(s, test, c, executor)?,
            LoadedModel::Lda(s, c) => lda_heldout_ll_with(s, test, c, executor)?,
        })
    }

    /// Document embeddings `γ` for the embedding model, `E[θ]` for LDA.
    fn features(&self, corpus: &Corpus, executor: &Executor) -> Result<Vec<Vec<f64>>, CliError> {
        Ok(match self {
            LoadedModel::Embedding(s, c) => document_embeddings(s, corpus, c, executor)?,
            LoadedModel::Lda(s, _) => lda_features(s, corpus, executor),
        })
    }
}

fn read_split(path: &Path, num_docs: usize) -> Result<Vec<usize>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let mut ids = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |msg: String| {
            CliError::Core(Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: msg,
            })
        };
        let id: usize = line
            .parse()
            .map_err(|_| bad(format!("expected a document index, got {line:?}")))?;
        if id >= num_docs {
            return Err(bad(format!(
                "document index {id} out of range for {num_docs} documents"
            )));
        }
        ids.push(id);
    }
    ids.sort_unstable();
    ids.dedup();
    Ok(ids)
}

fn labels_of(corpus: &Corpus) -> Vec<u32> {
    corpus.docs.iter().map(|d| d.label.unwrap_or(0)).collect()
}

pub fn eval(args: &EvalArgs) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("eval", args.workers);
    if args.retrieval && args.labels.is_none() {
        return Err(CliError::Usage("--retrieval needs document labels (--labels)".into()));
    }
    if args.retrieval && args.split.is_none() && args.base_docword.is_none() {
        return Err(CliError::Usage(
            "--retrieval needs a base corpus (--split or --base-docword)".into(),
        ));
    }
    if args.base_docword.is_some() && args.retrieval && args.base_labels.is_none() {
        return Err(CliError::Usage(
            "--base-docword needs --base-labels for retrieval".into(),
        ));
    }

    let model = if args.baseline {
        let (s, c) = load_lda(&args.model)?;
        LoadedModel::Lda(s, c)
    } else {
        let (s, c) = load_model(&args.model)?;
        LoadedModel::Embedding(s, c)
    };
    manifest.input("model", &args.model)?;
    let corpus = load_corpus(&args.docword, &args.vocab, args.labels.as_deref(), &mut manifest, "")?;
    if corpus.num_words() != model.num_words() {
        return Err(Error::Shape(format!(
            "corpus has V={} but the model has V={}",
            corpus.num_words(),
            model.num_words()
        ))
        .into());
    }
    let (queries, split_base) = match &args.split {
        Some(path) => {
            let test_idx = read_split(path, corpus.num_docs())?;
            manifest.input("split", path)?;
            let mut is_test = vec![false; corpus.num_docs()];
            test_idx.iter().for_each(|&i| is_test[i] = true);
            let train_idx: Vec<usize> = (0..corpus.num_docs()).filter(|&i| !is_test[i]).collect();
            (corpus.subset(&test_idx), Some(corpus.subset(&train_idx)))
        }
        None => (corpus, None),
    };
    let base = match &args.base_docword {
        Some(docword) => Some(load_corpus(
            docword,
            &args.vocab,
            args.base_labels.as_deref(),
            &mut manifest,
            "base_",
        )?),
        None => split_base,
    };
    let executor = Executor::new(args.workers)?;
    let (LoadedModel::Embedding(_, c) | LoadedModel::Lda(_, c)) = &model;
    manifest.seed = Some(c.seed);
    manifest.set_config(c.entries());
    manifest.phase("load");

    create_dir(&args.out)?;
    let ll = model.heldout_ll(&queries, &executor)?;
    let metrics_path = args.out.join(METRICS_FILE);
    write_file(
        &metrics_path,
        &format!(
            "metric\tvalue\nheldout_perword_ll\t{ll:.6}\nscored_docs\t{}\n",
            queries.docs.iter().filter(|d| d.len() >= 2).count()
        ),
    )?;
    manifest.output("metrics", &metrics_path)?;
    manifest.phase("likelihood");

    let query_features = if args.retrieval || args.features {
        Some(model.features(&queries, &executor)?)
    } else {
        None
    };
    if args.retrieval {
        let base = base.expect("base corpus checked above");
        let base_features = model.features(&base, &executor)?;
        let curve = retrieval_pr(
            query_features.as_deref().unwrap_or_default(),
            &base_features,
            &labels_of(&queries),
            &labels_of(&base),
            &args.cutoffs,
        )?;
        let mut text = String::from("cutoff\trecall\tprecision\n");
        for p in &curve.points {
            let _ = writeln!(text, "{}\t{:.6}\t{:.6}", p.cutoff, p.recall, p.precision);
        }
        let pr_path = args.out.join(PR_FILE);
        write_file(&pr_path, &text)?;
        manifest.output("pr", &pr_path)?;
        manifest.note("retrieval_queries", curve.num_queries);
        manifest.phase("retrieval");
    }
    if args.features {
        let path = args.out.join(FEATURES_FILE);
        write_features(&path, &queries, query_features.as_deref().unwrap_or_default())?;
        manifest.output("features", &path)?;
        manifest.phase("features");
    }
    manifest.write(&args.out)
}

fn read_vocab(path: &Path) -> Result<Vec<String>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    Ok(text.lines().map(|l| l.trim().to_string()).collect())
}

pub fn export(args: &ExportArgs) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("export", 1);
    if !args.threshold.is_finite() {
        return Err(CliError::Config(vec![format!(
            "threshold must be finite ({})",
            args.threshold
        )]));
    }
    let (state, config) = load_model(&args.model)?;
    manifest.input("model", &args.model)?;
    let vocab = match &args.vocab {
        Some(path) => {
            let v = read_vocab(path)?;
            if v.len() != state.num_words() {
                return Err(Error::Shape(format!(
                    "vocabulary has {} words but the model has V={}",
                    v.len(),
                    state.num_words()
                ))
                .into());
            }
            manifest.input("vocab", path)?;
            v
        }
        None => Vec::new(),
    };
    manifest.seed = Some(config.seed);
    manifest.set_config(config.entries());
    manifest.note("threshold", args.threshold);
    manifest.note("top_words", args.top_words);
    manifest.phase("load");

    create_dir(&args.out)?;
    let graph = correlation_graph(&state, &config, &vocab, args.threshold, args.max_degree, args.top_words)?;
    let stem = args.out.join("graph");
    export_graph(&graph, &stem)?;
    let embeddings = args.out.join("embeddings.tsv");
    export_embeddings(&state, &embeddings)?;

    let mut topics = String::from("topic\ttop_words\n");
    for k in 0..state.num_topics() {
        let words: Vec<String> = topic_top_words(&state.words, k, args.top_words)?
            .into_iter()
            .map(|w| vocab.get(w as usize).cloned().unwrap_or_else(|| format!("w{w}")))
            .collect();
        let _ = writeln!(topics, "{k}\t{}", words.join(" "));
    }
    let topics_path = args.out.join("topics.tsv");
    write_file(&topics_path, &topics)?;

    for (role, path) in [
        ("edges", stem.with_extension("edges")),
        ("gml", stem.with_extension("gml")),
        ("embeddings", embeddings),
        ("topics", topics_path),
    ] {
        manifest.output(role, &path)?;
    }
    if state.num_topics() <= MAX_DENSE_TOPICS {
        let cov = covariance_matrix(&state, &config)?;
        let mut text = String::from("# cov(eta_i, eta_j) = mu_i.mu_j + [i = j] (tr Sigma_u + 1/tau)\n");
        for row in cov {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            let _ = writeln!(text, "{}", cells.join("\t"));
        }
        let path = args.out.join("covariance.tsv");
        write_file(&path, &text)?;
        manifest.output("covariance", &path)?;
    }
    manifest.note("edges", graph.edges.len());
    manifest.phase("export");
    manifest.write(&args.out)
}
