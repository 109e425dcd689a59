use crate::corpus::Document;
use crate::error::Result;
use crate::model::{DocState, GlobalState, ModelConfig};
use crate::numerics::{sym_inverse, SymMatrix};
use crate::sparsity::rebuild_truncation;

/// Sufficient statistics of one minibatch.
#[derive(Debug, Clone, PartialEq)]
pub struct MinibatchStats {
    num_topics: usize,
    embed_dim: usize,
    /// `Σ_d ξ_dk γ_d`, `K × M` row-major.
    pub xi_gamma: Vec<f64>,
    /// `Σ_d γ_d γ_dᵀ`; the `B Σ^(a)` part is added in the global step.
    pub gamma_outer: SymMatrix,
    /// `(topic << 32) | word` for every sampled token.
    assignments: Vec<u64>,
    pub num_docs: usize,
}

impl MinibatchStats {
    pub fn new(num_topics: usize, embed_dim: usize) -> Self {
        Self {
            num_topics,
            embed_dim,
            xi_gamma: vec![0.0; num_topics * embed_dim],
            gamma_outer: SymMatrix::zeros(embed_dim),
            assignments: Vec::new(),
            num_docs: 0,
        }
    }

    pub fn add(&mut self, doc: &Document, ds: &DocState) {
        let m = self.embed_dim;
        for (k, &x) in ds.xi.iter().enumerate() {
            let row = &mut self.xi_gamma[k * m..(k + 1) * m];
            for (r, &g) in row.iter_mut().zip(&ds.gamma) {
                *r += x * g;
            }
        }
        self.gamma_outer.add_outer(&ds.gamma, 1.0);
        self.assignments.extend(
            doc.tokens
                .iter()
                .zip(&ds.assignments)
                .map(|(&w, &z)| ((z as u64) << 32) | w as u64),
        );
        self.num_docs += 1;
    }

    pub fn num_tokens(&self) -> usize {
        self.assignments.len()
    }

    /// Word-topic counts as per-topic `(word, count)` lists sorted by word.
    pub fn word_topic_counts(&self) -> Vec<Vec<(u32, f64)>> {
        let mut sorted = self.assignments.clone();
        sorted.sort_unstable();
        let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); self.num_topics];
        let mut i = 0;
        while i < sorted.len() {
            let key = sorted[i];
            let mut j = i;
            while j < sorted.len() && sorted[j] == key {
                j += 1;
            }
            rows[(key >> 32) as usize].push((key as u32, (j - i) as f64));
            i = j;
        }
        rows
    }
}

/// Blends the minibatch's stochastic optima into the global state:
/// `Σ^(u)* = [αI + τ(D/B)Σ_d(Σ^(a) + γγᵀ)]⁻¹`, `μ* = τΣ^(u)*(D/B)Σ_d ξ_dk γ_d`,
/// `λ* = β + (D/B)·counts`, each as `x ← (1 − ι)x + ι x*`; then recomputes
/// `Σ^(a)` and the truncation.
pub fn global_step(
    stats: &MinibatchStats,
    state: &mut GlobalState,
    rate: f64,
    num_docs: usize,
    config: &ModelConfig,
) -> Result<()> {
    let (k_total, m) = (state.num_topics(), state.embed_dim());
    let batch = stats.num_docs.max(1) as f64;
    let scale = num_docs as f64 / batch;

    let mut precision = stats.gamma_outer.clone();
    precision.add_scaled(&state.doc_cov, stats.num_docs as f64);
    precision.scale(config.tau * scale);
    precision.add_diagonal(config.alpha);
    let cov_opt = sym_inverse(&precision)?;

    let means = state.topic_means_mut();
    let mut opt = vec![0.0; m];
    for k in 0..k_total {
        cov_opt.mul_vec_into(&stats.xi_gamma[k * m..(k + 1) * m], &mut opt);
        for (mu, &o) in means[k * m..(k + 1) * m].iter_mut().zip(&opt) {
            *mu = (1.0 - rate) * *mu + rate * config.tau * scale * o;
        }
    }
    state.topic_cov.blend(&cov_opt, rate);

    let mut counts = stats.word_topic_counts();
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
        state.num_words(),
    );
    state.refresh_doc_cov(config)?;
    state.iteration += 1;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::init_params;
    use crate::numerics::RandomStream;

    fn setup() -> (GlobalState, ModelConfig) {
        let mut c = ModelConfig::new(3);
        c.embed_dim = 2;
        c.topic_top_words = 6;
        (init_params(&c, 6, &mut RandomStream::new(1, 0)).unwrap(), c)
    }

    #[test]
    fn zero_rate_keeps_means_and_words() {
        let (s, c) = setup();
        let mut stats = MinibatchStats::new(3, 2);
        let mut ds = DocState::new(&c, 2);
        ds.xi = vec![0.5, -1.0, 2.0];
        ds.gamma = vec![0.1, 0.2];
        ds.assignments = vec![1, 2];
        stats.add(&Document::new(vec![0, 5]), &ds);
        let mut next = s.clone();
        global_step(&stats, &mut next, 0.0, 10, &c).unwrap();
        assert_eq!(next.topic_means(), s.topic_means());
        assert_eq!(next.topic_cov, s.topic_cov);
        assert_eq!(next.words.to_dense(), s.words.to_dense());
        assert_eq!(next.iteration, 1);
    }

    #[test]
    fn empty_counts_reset_lambda_to_prior() {
        let (mut s, c) = setup();
        let stats = MinibatchStats::new(3, 2);
        global_step(&stats, &mut s, 1.0, 1, &c).unwrap();
        for row in s.words.to_dense() {
            assert!(row.iter().all(|&v| v == c.beta));
        }
    }

    #[test]
    fn counts_sum_to_tokens() {
        let (_, c) = setup();
        let mut stats = MinibatchStats::new(3, 2);
        let mut ds = DocState::new(&c, 4);
        ds.assignments = vec![0, 0, 2, 1];
        stats.add(&Document::new(vec![3, 3, 3, 1]), &ds);
        let rows = stats.word_topic_counts();
        let total: f64 = rows.iter().flatten().map(|e| e.1).sum();
        assert_eq!(total, 4.0);
        assert_eq!(rows[0], vec![(3, 2.0)]);
    }
}
