//! Stochastic variational LDA: the Dirichlet-prior baseline trained with the
//! same schedule, minibatching, truncation, and evaluation protocol.

use std::path::Path;
use std::time::Instant;

use rand::seq::SliceRandom;

use crate::corpus::{Corpus, Document};
use crate::error::{Error, Result};
use crate::evaluation::completion_ll;
use crate::inference::{lr_schedule, TraceRow};
use crate::model::{read_container, write_container, Container, ModelConfig, ModelKind};
use crate::numerics::{psi, RandomStream};
use crate::parallel::Executor;
use crate::sparsity::{from_sorted_rows, rebuild_truncation, TruncatedTopicWords};

const INIT_STREAM: u64 = 0x4c44_4149;
const SHUFFLE_STREAM: u64 = 0x4c44_4153;

const MAX_DOC_ITERS: usize = 100;
const DOC_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct LdaState {
    /// Variational Dirichlet parameters of the topics.
    pub words: TruncatedTopicWords,
    /// Symmetric Dirichlet concentration of document proportions.
    pub doc_prior: f64,
    pub iteration: u64,
}

#[derive(Debug, Clone)]
pub struct LdaOutput {
    pub state: LdaState,
    pub trace: Vec<TraceRow>,
    pub converged: bool,
}

/// `λ_kv = β + Uniform(0, 1)`, truncated like the embedding model.
pub fn lda_init(config: &ModelConfig, num_words: usize, rng: &mut RandomStream) -> Result<LdaState> {
    config.checked(num_words)?;
    let raw: Vec<Vec<(u32, f64)>> = (0..config.num_topics)
        .map(|_| {
            (0..num_words as u32)
                .map(|w| (w, config.beta + rng.uniform()))
                .collect()
        })
        .collect();
    Ok(LdaState {
        words: rebuild_truncation(
            raw,
            config.topic_top_words,
            config.min_word_topics,
            config.beta,
            num_words,
        ),
        doc_prior: config.lda_doc_prior,
        iteration: 0,
    })
}

/// Per-document variational parameters: Dirichlet `γ` and one
/// responsibility vector per distinct word.
#[derive(Debug, Clone, PartialEq)]
pub struct LdaDocState {
    pub gamma: Vec<f64>,
    /// `(word, count)` pairs, aligned with `responsibilities`.
    pub word_counts: Vec<(u32, u32)>,
    pub responsibilities: Vec<Vec<f64>>,
    pub iterations: usize,
}

/// `exp(E[log φ_kv])` for one word, rescaled by its maximum over topics.
fn word_factors(words: &TruncatedTopicWords, v: u32, out: &mut [f64]) {
    for (k, o) in out.iter_mut().enumerate() {
        *o = words.residual_log_weight(k);
    }
    for e in words.word_entries(v) {
        out[e.topic as usize] = e.log_weight;
    }
    let max = out.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for o in out.iter_mut() {
        *o = (*o - max).exp();
    }
}

/// Coordinate ascent on one document's `γ` and responsibilities until the
/// mean absolute change in `γ` falls below `1e-3` (at most 100 rounds).
pub fn lda_local(doc: &Document, state: &LdaState) -> LdaDocState {
    let k_total = state.words.num_topics();
    let word_counts = doc.word_counts();
    let factors: Vec<Vec<f64>> = word_counts
        .iter()
        .map(|&(v, _)| {
            let mut f = vec![0.0; k_total];
            word_factors(&state.words, v, &mut f);
            f
        })
        .collect();
    let prior = state.doc_prior;
    let mut gamma = vec![prior + doc.len() as f64 / k_total as f64; k_total];
    let mut resp = vec![vec![0.0; k_total]; word_counts.len()];
    let mut theta = vec![0.0; k_total];
    let mut next = vec![0.0; k_total];
    let mut iterations = 0;
    while iterations < MAX_DOC_ITERS {
        iterations += 1;
        let total_psi = psi(gamma.iter().sum());
        for (t, &g) in theta.iter_mut().zip(&gamma) {
            *t = (psi(g) - total_psi).exp();
        }
        next.iter_mut().for_each(|x| *x = prior);
        for ((r, f), &(_, count)) in resp.iter_mut().zip(&factors).zip(&word_counts) {
            let mut norm = 0.0;
            for k in 0..k_total {
                r[k] = theta[k] * f[k];
                norm += r[k];
            }
            let inv = norm.recip();
            for k in 0..k_total {
                r[k] *= inv;
                next[k] += count as f64 * r[k];
            }
        }
        let change = gamma.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum::<f64>() / k_total as f64;
        std::mem::swap(&mut gamma, &mut next);
        if change < DOC_TOL {
            break;
        }
    }
    LdaDocState {
        gamma,
        word_counts,
        responsibilities: resp,
        iterations,
    }
}

/// Expected topic proportions `γ / Σγ`.
pub fn lda_theta(ds: &LdaDocState) -> Vec<f64> {
    let total: f64 = ds.gamma.iter().sum();
    ds.gamma.iter().map(|g| g / total).collect()
}

/// Expected word-topic counts `Σ_d c_dv φ_dvk` as per-topic rows.
pub fn lda_expected_counts(doc_states: &[LdaDocState], num_topics: usize) -> Vec<Vec<(u32, f64)>> {
    let mut pairs: Vec<(u32, u32, f64)> = Vec::new();
    for ds in doc_states {
        for (&(v, count), r) in ds.word_counts.iter().zip(&ds.responsibilities) {
            for (k, &p) in r.iter().enumerate() {
                if p > 0.0 {
                    pairs.push((k as u32, v, count as f64 * p));
                }
            }
        }
    }
    pairs.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); num_topics];
    for (k, v, c) in pairs {
        let row = &mut rows[k as usize];
        match row.last_mut() {
            Some(last) if last.0 == v => last.1 += c,
            _ => row.push((v, c)),
        }
    }
    rows
}

/// `λ ← (1 − ι)λ + ι(β + (D/B)·expected counts)`, then re-truncation.
pub fn lda_global_step(
    state: &mut LdaState,
    doc_states: &[LdaDocState],
    rate: f64,
    num_docs: usize,
    config: &ModelConfig,
) {
    let scale = num_docs as f64 / doc_states.len().max(1) as f64;
    let mut counts = lda_expected_counts(doc_states, state.words.num_topics());
    for row in &mut counts {
        for e in row.iter_mut() {
            e.1 *= scale;
        }
    }
    let raw = state.words.blend_with_counts(&counts, rate);
    state.words = rebuild_truncation(
        raw,
        config.topic_top_words,
        config.min_word_topics,
        config.beta,
        state.words.num_words(),
    );
    state.iteration += 1;
}

/// One minibatch: local coordinate ascent for every document, then a global step.
pub fn lda_step(
    state: &mut LdaState,
    corpus: &Corpus,
    batch: &[usize],
    num_docs: usize,
    config: &ModelConfig,
    executor: &Executor,
) -> f64 {
    let doc_states = {
        let s: &LdaState = state;
        executor.map(batch.len(), |i| lda_local(&corpus.docs[batch[i]], s))
    };
    let rate = lr_schedule(state.iteration);
    lda_global_step(state, &doc_states, rate, num_docs, config);
    rate
}

/// Same loop and stopping rule as the embedding model's training.
pub fn lda_train(
    corpus: &Corpus,
    heldout: Option<&Corpus>,
    config: &ModelConfig,
    executor: &Executor,
) -> Result<LdaOutput> {
    let mut rng = RandomStream::derive(config.seed, &[INIT_STREAM]);
    let mut state = lda_init(config, corpus.num_words(), &mut rng)?;
    let active: Vec<usize> = (0..corpus.num_docs()).filter(|&d| !corpus.docs[d].is_empty()).collect();
    if active.is_empty() {
        return Err(Error::Empty("training corpus has no non-empty documents".into()));
    }
    let started = Instant::now();
    let mut trace = Vec::new();
    let mut previous: Option<f64> = None;
    let mut converged = false;
    'epochs: for epoch in 0..config.max_epochs as u64 {
        let mut order = active.clone();
        order.shuffle(&mut RandomStream::derive(config.seed, &[SHUFFLE_STREAM, epoch]));
        let batches: Vec<&[usize]> = order.chunks(config.batch_size).collect();
        let interval = batches.len().div_ceil(config.evals_per_epoch).max(1);
        for (b, batch) in batches.iter().enumerate() {
            let rate = lda_step(&mut state, corpus, batch, active.len(), config, executor);
            let Some(test) = heldout else { continue };
            if (b + 1) % interval != 0 && b + 1 != batches.len() {
                continue;
            }
            let ll = lda_heldout_ll_with(&state, test, config, executor)?;
            trace.push(TraceRow {
                iteration: state.iteration,
                rate,
                heldout_ll: ll,
                seconds: started.elapsed().as_secs_f64(),
            });
            if let Some(prev) = previous {
                if (ll - prev).abs() < config.outer_tol {
                    converged = true;
                    break 'epochs;
                }
            }
            previous = Some(ll);
        }
    }
    Ok(LdaOutput {
        state,
        trace,
        converged,
    })
}

/// Held-out per-word log-likelihood by document completion with
/// `θ̂ = γ / Σγ`.
pub fn lda_heldout_ll(state: &LdaState, test: &Corpus, config: &ModelConfig) -> Result<f64> {
    lda_heldout_ll_with(state, test, config, &Executor::sequential())
}

pub fn lda_heldout_ll_with(state: &LdaState, test: &Corpus, config: &ModelConfig, executor: &Executor) -> Result<f64> {
    completion_ll(test, &state.words, config.seed, executor, |observed, _| {
        Ok(lda_theta(&lda_local(observed, state)))
    })
}

/// Expected topic proportions of every document; empty documents get the
/// prior mean.
pub fn lda_features(state: &LdaState, corpus: &Corpus, executor: &Executor) -> Vec<Vec<f64>> {
    let k_total = state.words.num_topics();
    executor.map(corpus.num_docs(), |d| {
        let doc = &corpus.docs[d];
        if doc.is_empty() {
            vec![1.0 / k_total as f64; k_total]
        } else {
            lda_theta(&lda_local(doc, state))
        }
    })
}

pub fn save_lda(state: &LdaState, config: &ModelConfig, path: impl AsRef<Path>) -> Result<()> {
    let mut config = config.clone();
    config.lda_doc_prior = state.doc_prior;
    write_container(
        &Container {
            kind: ModelKind::Lda,
            config,
            num_words: state.words.num_words(),
            iteration: state.iteration,
            embedding: None,
            lambda: state.words.rows().to_vec(),
        },
        path.as_ref(),
    )
}

pub fn load_lda(path: impl AsRef<Path>) -> Result<(LdaState, ModelConfig)> {
    let c = read_container(path.as_ref())?;
    if c.kind != ModelKind::Lda {
        return Err(Error::ModelFormat(
            "expected an lda model, found kind \"embedding\"".into(),
        ));
    }
    let state = LdaState {
        words: from_sorted_rows(c.lambda, c.config.beta, c.num_words),
        doc_prior: c.config.lda_doc_prior,
        iteration: c.iteration,
    };
    Ok((state, c.config))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus() -> Corpus {
        let docs = vec![
            Document::new(vec![0, 0, 1, 2]),
            Document::new(vec![3, 3, 3]),
            Document::new(vec![1, 2, 4, 4, 0]),
        ];
        Corpus::with_anonymous_vocab(docs, 5).unwrap()
    }

    fn config(k: usize) -> ModelConfig {
        let mut c = ModelConfig::new(k);
        c.embed_dim = 0;
        c.topic_top_words = 5;
        c.min_word_topics = 1;
        c
    }

    #[test]
    fn single_topic_takes_all_counts() {
        let c = config(1);
        let corpus = corpus();
        let mut state = lda_init(&c, 5, &mut RandomStream::new(0, 0)).unwrap();
        let all: Vec<usize> = (0..3).collect();
        let docs: Vec<LdaDocState> = all.iter().map(|&d| lda_local(&corpus.docs[d], &state)).collect();
        assert!(docs.iter().all(|d| d.responsibilities.iter().all(|r| r == &vec![1.0])));
        lda_global_step(&mut state, &docs, 1.0, 3, &c);
        let freq = corpus.word_frequencies();
        for w in 0..5u32 {
            assert!((state.words.value(0, w) - (c.beta + freq[w as usize] as f64)).abs() < 1e-12);
        }
        assert_eq!(
            lda_features(&state, &corpus, &Executor::sequential()),
            vec![vec![1.0]; 3]
        );
    }

    #[test]
    fn uniform_lambda_scores_log_vocab() {
        let c = config(3);
        let mut state = lda_init(&c, 5, &mut RandomStream::new(0, 0)).unwrap();
        state.words = rebuild_truncation(vec![(0..5u32).map(|w| (w, 1.0)).collect(); 3], 5, 1, c.beta, 5);
        let ll = lda_heldout_ll(&state, &corpus(), &c).unwrap();
        assert!((ll + 5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn features_are_distributions() {
        let c = config(4);
        let state = lda_init(&c, 5, &mut RandomStream::new(1, 0)).unwrap();
        for row in lda_features(&state, &corpus(), &Executor::sequential()) {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn save_load_round_trip_and_kind_check() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lda.txt");
        let c = config(3);
        let state = lda_init(&c, 5, &mut RandomStream::new(2, 0)).unwrap();
        save_lda(&state, &c, &path).unwrap();
        let (back, _) = load_lda(&path).unwrap();
        assert_eq!(back, state);
        assert!(matches!(crate::model::load_model(&path), Err(Error::ModelFormat(_))));
    }
}
