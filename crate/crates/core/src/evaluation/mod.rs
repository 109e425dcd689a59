//! Held-out likelihood by document completion, retrieval precision and
//! recall, and feature export.

mod retrieval;

pub use retrieval::{retrieval_pr, PrCurve, PrPoint};

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::corpus::{split_document, Corpus, Document};
use crate::error::{Error, Result};
use crate::inference::local_step;
use crate::model::{GlobalState, ModelConfig};
use crate::numerics::{softmax_in_place, stream_id, RandomStream};
use crate::parallel::Executor;
use crate::sparsity::TruncatedTopicWords;

/// Share of each test document's tokens that is observed.
pub const OBSERVED_FRACTION: f64 = 0.8;

const SPLIT_STREAM: u64 = 0x4845_4c44;
const INFER_STREAM: u64 = 0x4845_4c49;
const FEATURE_STREAM: u64 = 0x4645_4154;

/// Order-independent identity of a document, used to seed its split.
pub(crate) fn content_hash(doc: &Document) -> u64 {
    let mut parts: Vec<u64> = Vec::with_capacity(doc.tokens.len() + 1);
    parts.push(doc.tokens.len() as u64);
    parts.extend(doc.tokens.iter().map(|&t| t as u64));
    stream_id(&parts)
}

/// `log Σ_k θ_k λ_kv / Λ_k` for each held-out token, `O(K + deg(v))` per token.
pub(crate) fn score_tokens(theta: &[f64], words: &TruncatedTopicWords, tokens: &[u32]) -> f64 {
    let beta = words.beta();
    let base: f64 = theta.iter().enumerate().map(|(k, t)| t * beta / words.total(k)).sum();
    tokens
        .iter()
        .map(|&v| {
            let extra: f64 = words
                .word_entries(v)
                .iter()
                .map(|e| theta[e.topic as usize] * (e.value - beta) / words.total(e.topic as usize))
                .sum();
            (base + extra).ln()
        })
        .sum()
}

/// Document completion: infer topic proportions from 80% of each test
/// document's tokens and score the rest. `infer` maps the observed part and
/// a seeded stream to `θ̂`. Documents with fewer than 2 tokens are skipped.
pub(crate) fn completion_ll<F>(
    test: &Corpus,
    words: &TruncatedTopicWords,
    seed: u64,
    executor: &Executor,
    infer: F,
) -> Result<f64>
where
    F: Fn(&Document, &mut RandomStream) -> Result<Vec<f64>> + Sync + Send,
{
    let eligible: Vec<&Document> = test.docs.iter().filter(|d| d.len() >= 2).collect();
    if eligible.is_empty() {
        return Err(Error::Empty("no test documents with at least 2 tokens".into()));
    }
    let per_doc = executor.map(eligible.len(), |i| -> Result<(u64, f64, usize)> {
        let doc = eligible[i];
        let hash = content_hash(doc);
        let (observed, heldout) = split_document(doc, OBSERVED_FRACTION, stream_id(&[SPLIT_STREAM, seed, hash]))?;
        let mut rng = RandomStream::derive(seed, &[INFER_STREAM, hash]);
        let theta = infer(&observed, &mut rng)?;
        Ok((hash, score_tokens(&theta, words, &heldout.tokens), heldout.len()))
    });
    let mut rows = per_doc.into_iter().collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)));
    let (sum, count) = rows.iter().fold((0.0, 0usize), |(s, c), r| (s + r.1, c + r.2));
    Ok(sum / count as f64)
}

/// Held-out per-word log-likelihood with `θ̂ = softmax(ξ)`.
pub fn heldout_perword_ll(state: &GlobalState, test: &Corpus, config: &ModelConfig) -> Result<f64> {
    heldout_perword_ll_with(state, test, config, &Executor::sequential())
}

/// [`heldout_perword_ll`] on a given executor.
pub fn heldout_perword_ll_with(
    state: &GlobalState,
    test: &Corpus,
    config: &ModelConfig,
    executor: &Executor,
) -> Result<f64> {
    completion_ll(test, &state.words, config.seed, executor, |observed, rng| {
        let (ds, _) = local_step(observed, state, config, rng)?;
        let mut theta = ds.xi;
        softmax_in_place(&mut theta);
        Ok(theta)
    })
}

/// `γ_d` for every document; empty documents get the zero vector.
pub fn document_embeddings(
    state: &GlobalState,
    corpus: &Corpus,
    config: &ModelConfig,
    executor: &Executor,
) -> Result<Vec<Vec<f64>>> {
    executor
        .map(corpus.num_docs(), |d| {
            let doc = &corpus.docs[d];
            if doc.is_empty() {
                return Ok(vec![0.0; state.embed_dim()]);
            }
            let mut rng = RandomStream::derive(config.seed, &[FEATURE_STREAM, content_hash(doc)]);
            local_step(doc, state, config, &mut rng).map(|(ds, _)| ds.gamma)
        })
        .into_iter()
        .collect()
}

/// One line per document: `label 1:v1 2:v2 …`; unlabeled documents get 0.
pub fn write_features(path: impl AsRef<Path>, corpus: &Corpus, features: &[Vec<f64>]) -> Result<()> {
    let path = path.as_ref();
    if features.len() != corpus.num_docs() {
        return Err(Error::Shape(format!(
            "{} feature rows for {} documents",
            features.len(),
            corpus.num_docs()
        )));
    }
    let io = |e| Error::io(path, e);
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    for (doc, row) in corpus.docs.iter().zip(features) {
        write!(out, "{}", doc.label.unwrap_or(0)).map_err(io)?;
        for (i, v) in row.iter().enumerate() {
            write!(out, " {}:{}", i + 1, v).map_err(io)?;
        }
        writeln!(out).map_err(io)?;
    }
    out.flush().map_err(io)
}

/// Document embeddings of `corpus` written with [`write_features`].
pub fn export_features(
    state: &GlobalState,
    corpus: &Corpus,
    config: &ModelConfig,
    executor: &Executor,
    path: impl AsRef<Path>,
) -> Result<()> {
    let features = document_embeddings(state, corpus, config, executor)?;
    write_features(path, corpus, &features)
}

/// The `n` retained words of topic `k` with the largest `λ_kv`, ties to the
/// smaller word id.
pub fn topic_top_words(words: &TruncatedTopicWords, k: usize, n: usize) -> Result<Vec<u32>> {
    if k >= words.num_topics() {
        return Err(Error::Domain(format!(
            "topic {k} out of range (K={})",
            words.num_topics()
        )));
    }
    let mut row = words.row(k).to_vec();
    row.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(row.into_iter().take(n).map(|e| e.0).collect())
}
