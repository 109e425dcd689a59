//! Configuration, global variational state, and per-document state.

mod config;
mod io;

pub use config::ModelConfig;
pub use io::{load_model, load_model_checked, save_model, ModelKind};

pub(crate) use io::{read_container, write_container, Container};

use crate::error::Result;
use crate::numerics::{sym_inverse, RandomStream, SymMatrix};
use crate::sparsity::{rebuild_truncation, TruncatedTopicWords};

/// Topic embeddings `q(u_k) = N(μ_k, Σ^(u))`, the shared document
/// embedding covariance `Σ^(a)`, and word weights `λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalState {
    num_topics: usize,
    embed_dim: usize,
    /// `K × M`, row-major.
    topic_means: Vec<f64>,
    pub topic_cov: SymMatrix,
    pub doc_cov: SymMatrix,
    pub words: TruncatedTopicWords,
    /// Global steps taken so far.
    pub iteration: u64,
    /// `E[UᵀU] = Σ_k μ_k μ_kᵀ + K Σ^(u)`, refreshed with `Σ^(a)`.
    topic_gram: SymMatrix,
    doc_cov_log_det: f64,
}

impl GlobalState {
    /// Assembles a state from parts, recomputing `Σ^(a)`.
    pub fn from_parts(
        topic_means: Vec<Vec<f64>>,
        topic_cov: SymMatrix,
        words: TruncatedTopicWords,
        config: &ModelConfig,
    ) -> Result<Self> {
        let num_topics = topic_means.len();
        let embed_dim = topic_cov.dim();
        if topic_means.iter().any(|r| r.len() != embed_dim) || words.num_topics() != num_topics {
            return Err(crate::Error::Shape(format!(
                "topic means must be {num_topics} x {embed_dim} with matching word rows"
            )));
        }
        let mut state = Self {
            num_topics,
            embed_dim,
            topic_means: topic_means.concat(),
            doc_cov: SymMatrix::zeros(embed_dim),
            topic_cov,
            words,
            iteration: 0,
            topic_gram: SymMatrix::zeros(embed_dim),
            doc_cov_log_det: 0.0,
        };
        state.refresh_doc_cov(config)?;
        Ok(state)
    }

    pub(crate) fn from_flat(
        num_topics: usize,
        embed_dim: usize,
        topic_means: Vec<f64>,
        topic_cov: SymMatrix,
        doc_cov: SymMatrix,
        words: TruncatedTopicWords,
        iteration: u64,
    ) -> Result<Self> {
        let mut state = Self {
            num_topics,
            embed_dim,
            topic_means,
            topic_cov,
            doc_cov,
            words,
            iteration,
            topic_gram: SymMatrix::zeros(embed_dim),
            doc_cov_log_det: 0.0,
        };
        state.topic_gram = state.compute_gram();
        state.doc_cov_log_det = state.doc_cov.cholesky()?.log_det();
        Ok(state)
    }

    #[inline]
    pub fn num_topics(&self) -> usize {
        self.num_topics
    }

    #[inline]
    pub fn embed_dim(&self) -> usize {
        self.embed_dim
    }

    #[inline]
    pub fn num_words(&self) -> usize {
        self.words.num_words()
    }

    /// `μ_k`
    #[inline]
    pub fn topic_mean(&self, k: usize) -> &[f64] {
        &self.topic_means[k * self.embed_dim..(k + 1) * self.embed_dim]
    }

    pub fn topic_means(&self) -> &[f64] {
        &self.topic_means
    }

    pub(crate) fn topic_means_mut(&mut self) -> &mut [f64] {
        &mut self.topic_means
    }

    pub fn topic_mean_rows(&self) -> Vec<Vec<f64>> {
        self.topic_means
            .chunks(self.embed_dim.max(1))
            .take(self.num_topics)
            .map(<[f64]>::to_vec)
            .collect()
    }

    /// `Σ_k μ_k μ_kᵀ`
    pub fn topic_scatter(&self) -> SymMatrix {
        let mut s = SymMatrix::zeros(self.embed_dim);
        for k in 0..self.num_topics {
            s.add_outer(self.topic_mean(k), 1.0);
        }
        s
    }

    fn compute_gram(&self) -> SymMatrix {
        let mut gram = self.topic_scatter();
        gram.add_scaled(&self.topic_cov, self.num_topics as f64);
        gram
    }

    /// `E[UᵀU] = Σ_k μ_k μ_kᵀ + K Σ^(u)`
    pub fn topic_gram(&self) -> &SymMatrix {
        &self.topic_gram
    }

    /// `log det Σ^(a)`
    pub fn doc_cov_log_det(&self) -> f64 {
        self.doc_cov_log_det
    }

    /// Recomputes `Σ^(a) = [ρI + τKΣ^(u) + τ Σ_k μ_k μ_kᵀ]⁻¹`.
    pub fn refresh_doc_cov(&mut self, config: &ModelConfig) -> Result<()> {
        self.topic_gram = self.compute_gram();
        let mut precision = self.topic_gram.clone();
        precision.scale(config.tau);
        precision.add_diagonal(config.rho);
        self.doc_cov = sym_inverse(&precision)?;
        self.doc_cov_log_det = self.doc_cov.cholesky()?.log_det();
        Ok(())
    }

    /// `μ γ`, the prior mean of the topic weights given a document embedding.
    pub fn project(&self, gamma: &[f64], out: &mut [f64]) {
        for (k, o) in out.iter_mut().enumerate() {
            *o = dot(self.topic_mean(k), gamma);
        }
    }
}

/// Variational state of one document.
#[derive(Debug, Clone, PartialEq)]
pub struct DocState {
    /// `γ_d`, mean of the document embedding.
    pub gamma: Vec<f64>,
    /// `ξ_d`, mean of the topic weights.
    pub xi: Vec<f64>,
    /// Fixed standard deviation of every topic weight, `τ^{-1/2}`.
    pub sigma: f64,
    /// Adagrad sum of squared gradients.
    pub grad_sq: Vec<f64>,
    /// Sampled topic per token.
    pub assignments: Vec<u32>,
    /// Tokens per topic under `assignments`.
    pub topic_counts: Vec<u32>,
}

impl DocState {
    pub fn new(config: &ModelConfig, num_tokens: usize) -> Self {
        let k = config.num_topics;
        Self {
            gamma: vec![0.0; config.embed_dim],
            xi: vec![0.0; k],
            sigma: config.topic_weight_std(),
            grad_sq: vec![0.0; k],
            assignments: vec![0; num_tokens],
            topic_counts: vec![0; k],
        }
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Random initialization: `μ_k ~ N(0, α⁻¹I)`, `Σ^(u) = α⁻¹I`,
/// `λ_kv = β + Uniform(0, 1)` truncated, and `Σ^(a)` from the above.
pub fn init_params(config: &ModelConfig, num_words: usize, rng: &mut RandomStream) -> Result<GlobalState> {
    config.checked(num_words)?;
    let (k_total, m) = (config.num_topics, config.embed_dim);
    let std = config.alpha.powf(-0.5);
    let topic_means: Vec<Vec<f64>> = (0..k_total)
        .map(|_| (0..m).map(|_| std * rng.standard_normal()).collect())
        .collect();
    let raw: Vec<Vec<(u32, f64)>> = (0..k_total)
        .map(|_| {
            (0..num_words as u32)
                .map(|w| (w, config.beta + rng.uniform()))
                .collect()
        })
        .collect();
    let words = rebuild_truncation(
        raw,
        config.topic_top_words,
        config.min_word_topics,
        config.beta,
        num_words,
    );
    GlobalState::from_parts(
        topic_means,
        SymMatrix::scaled_identity(m, 1.0 / config.alpha),
        words,
        config,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> ModelConfig {
        let mut c = ModelConfig::new(6);
        c.embed_dim = 2;
        c.topic_top_words = 5;
        c
    }

    #[test]
    fn prior_covariance_at_init() {
        let c = small_config();
        let s = init_params(&c, 20, &mut RandomStream::new(1, 0)).unwrap();
        assert_eq!(s.topic_cov, SymMatrix::scaled_identity(2, 10.0));
    }

    #[test]
    fn init_is_deterministic() {
        let c = small_config();
        let a = init_params(&c, 20, &mut RandomStream::new(4, 0)).unwrap();
        let b = init_params(&c, 20, &mut RandomStream::new(4, 0)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn doc_cov_matches_gauss_jordan() {
        let c = small_config();
        let s = init_params(&c, 20, &mut RandomStream::new(9, 0)).unwrap();
        let m = 2;
        let mut p = vec![vec![0.0; m]; m];
        for i in 0..m {
            for j in 0..m {
                let scatter: f64 = (0..6).map(|k| s.topic_mean(k)[i] * s.topic_mean(k)[j]).sum();
                p[i][j] = c.tau * scatter + c.tau * 6.0 * s.topic_cov.get(i, j) + if i == j { c.rho } else { 0.0 };
            }
        }
        let det = p[0][0] * p[1][1] - p[0][1] * p[1][0];
        let inv = [[p[1][1] / det, -p[0][1] / det], [-p[1][0] / det, p[0][0] / det]];
        for i in 0..m {
            for j in 0..m {
                assert!((s.doc_cov.get(i, j) - inv[i][j]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn init_respects_truncation() {
        let c = small_config();
        let s = init_params(&c, 20, &mut RandomStream::new(2, 0)).unwrap();
        for w in 0..20 {
            assert!(s.words.word_entries(w).len() >= 3);
        }
        for k in 0..6 {
            assert!(s.words.row(k).iter().all(|e| e.1 >= c.beta));
        }
    }
}
