//! Corpora drawn from the generative process of the embedding topic model.

use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson};

use super::{Corpus, Document};
use crate::error::{Error, Result};
use crate::model::ModelConfig;
use crate::numerics::{softmax_in_place, RandomStream};

/// Latent variables behind a synthetic corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticTruth {
    /// `K × V` row-stochastic topic word distributions.
    pub phi: Vec<Vec<f64>>,
    /// `K × M` topic embeddings.
    pub topic_embeddings: Vec<Vec<f64>>,
    /// `D × M` document embeddings.
    pub doc_embeddings: Vec<Vec<f64>>,
    /// `D × K` topic weights before the softmax.
    pub topic_weights: Vec<Vec<f64>>,
    /// Topic assignment of every token.
    pub assignments: Vec<Vec<u32>>,
}

impl SyntheticTruth {
    /// `U Uᵀ` entry for a pair of topics.
    pub fn embedding_gram(&self, i: usize, j: usize) -> f64 {
        dot(&self.topic_embeddings[i], &self.topic_embeddings[j])
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Symmetric Dirichlet draw computed in log space, so tiny concentrations do
/// not underflow: for `c < 1`, `G(c) ≐ G(c + 1) · U^{1/c}`.
pub fn sample_dirichlet(concentration: f64, dim: usize, rng: &mut impl Rng) -> Vec<f64> {
    let gamma = Gamma::new(concentration + 1.0, 1.0).expect("concentration must be positive");
    let mut logs: Vec<f64> = (0..dim)
        .map(|_| {
            let g: f64 = gamma.sample(rng);
            let u: f64 = rng.random::<f64>();
            // u in [0, 1); map 0 to the smallest positive double
            g.ln() + u.max(f64::MIN_POSITIVE).ln() / concentration
        })
        .collect();
    softmax_in_place(&mut logs);
    logs
}

fn gaussian(dim: usize, std: f64, rng: &mut RandomStream) -> Vec<f64> {
    (0..dim).map(|_| std * rng.standard_normal()).collect()
}

fn categorical(probs: &[f64], rng: &mut RandomStream) -> u32 {
    let u = rng.uniform();
    let mut acc = 0.0;
    for (k, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return k as u32;
        }
    }
    // rounding left u above the total; take the last positive entry
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0) as u32
}

/// Draws `(a_d, η_d)` pairs with the topic embeddings held fixed:
/// `a ~ N(0, ρ⁻¹I)`, `η ~ N(U a, τ⁻¹I)`.
pub fn sample_document_latents(
    topic_embeddings: &[Vec<f64>],
    rho: f64,
    tau: f64,
    count: usize,
    rng: &mut RandomStream,
) -> Vec<(Vec<f64>, Vec<f64>)> {
    let m = topic_embeddings.first().map_or(0, Vec::len);
    let (a_std, eta_std) = (rho.powf(-0.5), tau.powf(-0.5));
    (0..count)
        .map(|_| {
            let a = gaussian(m, a_std, rng);
            let eta = topic_embeddings
                .iter()
                .map(|u| dot(u, &a) + eta_std * rng.standard_normal())
                .collect();
            (a, eta)
        })
        .collect()
}

/// Full generative process: `φ_k ~ Dir(β)`, `u_k ~ N(0, α⁻¹I)`, then per
/// document `a_d`, `η_d`, `θ_d = softmax(η_d)`, `z ~ θ_d`, `w ~ φ_z`.
/// Document lengths are Poisson(`avg_len`) clamped to at least 1.
pub fn generate_synthetic(
    config: &ModelConfig,
    num_words: usize,
    num_docs: usize,
    avg_len: usize,
    seed: u64,
) -> Result<(Corpus, SyntheticTruth)> {
    config.checked(num_words)?;
    let mut rng = RandomStream::derive(seed, &[SYNTH_TOPICS]);
    let std = config.alpha.powf(-0.5);
    let u = (0..config.num_topics)
        .map(|_| gaussian(config.embed_dim, std, &mut rng))
        .collect();
    generate_synthetic_with_embeddings(config, num_words, u, num_docs, avg_len, seed)
}

/// Like [`generate_synthetic`] but with caller-supplied topic embeddings
/// (`K × M`).
pub fn generate_synthetic_with_embeddings(
    config: &ModelConfig,
    num_words: usize,
    topic_embeddings: Vec<Vec<f64>>,
    num_docs: usize,
    avg_len: usize,
    seed: u64,
) -> Result<(Corpus, SyntheticTruth)> {
    config.checked(num_words)?;
    if avg_len == 0 {
        return Err(Error::Domain("average document length must be at least 1".into()));
    }
    let k = config.num_topics;
    if topic_embeddings.len() != k || topic_embeddings.iter().any(|u| u.len() != config.embed_dim) {
        return Err(Error::Shape(format!(
            "topic embeddings must be {k} x {}",
            config.embed_dim
        )));
    }

    let mut rng = RandomStream::derive(seed, &[SYNTH_PHI]);
    let phi: Vec<Vec<f64>> = (0..k)
        .map(|_| sample_dirichlet(config.beta, num_words, &mut rng))
        .collect();
    // cumulative tables for word draws
    let phi_cdf: Vec<Vec<f64>> = phi
        .iter()
        .map(|row| {
            row.iter()
                .scan(0.0, |acc, p| {
                    *acc += p;
                    Some(*acc)
                })
                .collect()
        })
        .collect();

    let lengths = Poisson::new(avg_len as f64).map_err(|e| Error::Domain(e.to_string()))?;
    let mut rng = RandomStream::derive(seed, &[SYNTH_DOCS]);
    let latents = sample_document_latents(&topic_embeddings, config.rho, config.tau, num_docs, &mut rng);

    let mut docs = Vec::with_capacity(num_docs);
    let mut doc_embeddings = Vec::with_capacity(num_docs);
    let mut topic_weights = Vec::with_capacity(num_docs);
    let mut assignments = Vec::with_capacity(num_docs);
    let mut theta = vec![0.0; k];
    for (a, eta) in latents {
        let n = (lengths.sample(&mut rng) as usize).max(1);
        theta.copy_from_slice(&eta);
        softmax_in_place(&mut theta);
        let mut z = Vec::with_capacity(n);
        let mut tokens = Vec::with_capacity(n);
        for _ in 0..n {
            let topic = categorical(&theta, &mut rng);
            let cdf = &phi_cdf[topic as usize];
            let u = rng.uniform() * cdf[num_words - 1];
            let w = cdf.partition_point(|&c| c <= u).min(num_words - 1);
            z.push(topic);
            tokens.push(w as u32);
        }
        docs.push(Document::new(tokens));
        doc_embeddings.push(a);
        topic_weights.push(eta);
        assignments.push(z);
    }

    let corpus = Corpus::with_anonymous_vocab(docs, num_words)?;
    Ok((
        corpus,
        SyntheticTruth {
            phi,
            topic_embeddings,
            doc_embeddings,
            topic_weights,
            assignments,
        },
    ))
}

const SYNTH_TOPICS: u64 = 0x7379_6e74_0001;
const SYNTH_PHI: u64 = 0x7379_6e74_0002;
const SYNTH_DOCS: u64 = 0x7379_6e74_0003;
