use std::f64::consts::PI;

use crate::corpus::Document;
use crate::model::{dot, DocState, GlobalState, ModelConfig};
use crate::numerics::{log_sum_exp, psi, RandomStream};

/// Document-level ELBO terms under the hard topic samples in a [`DocState`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LocalElbo {
    /// `E[log p(a_d)]`
    pub embedding_prior: f64,
    /// `E[log p(η_d | U, a_d)]`
    pub weight_prior: f64,
    /// `Σ_n E[log p(z̃_dn | η_d)]`, Monte Carlo over `η`.
    pub assignments: f64,
    /// `Σ_n E[log p(w_dn | z̃_dn, φ)]`
    pub words: f64,
    /// `H[q(a_d)]`
    pub embedding_entropy: f64,
    /// `H[q(η_d)]`
    pub weight_entropy: f64,
}

impl LocalElbo {
    pub fn total(&self) -> f64 {
        self.embedding_prior
            + self.weight_prior
            + self.assignments
            + self.words
            + self.embedding_entropy
            + self.weight_entropy
    }
}

/// Monte Carlo estimate of the per-document ELBO with `samples` draws of `η`.
pub fn estimate_local_elbo(
    ds: &DocState,
    doc: &Document,
    state: &GlobalState,
    config: &ModelConfig,
    rng: &mut RandomStream,
    samples: usize,
) -> LocalElbo {
    let k_total = ds.xi.len();
    let noise: Vec<Vec<f64>> = (0..samples)
        .map(|_| (0..k_total).map(|_| rng.standard_normal()).collect())
        .collect();
    local_elbo_with_noise(ds, doc, state, config, &noise)
}

/// [`estimate_local_elbo`] with caller-supplied standard normal noise; the
/// same noise reproduces the same value, which finite-difference checks rely on.
pub fn local_elbo_with_noise(
    ds: &DocState,
    doc: &Document,
    state: &GlobalState,
    config: &ModelConfig,
    noise: &[Vec<f64>],
) -> LocalElbo {
    let (k_total, m) = (ds.xi.len(), ds.gamma.len());
    let (tau, rho, sigma) = (config.tau, config.rho, ds.sigma);
    let ln2pi = (2.0 * PI).ln();

    let embedding_prior =
        -0.5 * m as f64 * (ln2pi - rho.ln()) - 0.5 * rho * (dot(&ds.gamma, &ds.gamma) + state.doc_cov.trace());

    // E‖η − U a‖² = Σ(ξ² + σ²) − 2 ξᵀμγ + γᵀGγ + tr(G Σ^(a)), G = E[UᵀU]
    let mut prior_mean = vec![0.0; k_total];
    state.project(&ds.gamma, &mut prior_mean);
    let gram = state.topic_gram();
    let sq_dist = dot(&ds.xi, &ds.xi) + k_total as f64 * sigma * sigma - 2.0 * dot(&ds.xi, &prior_mean)
        + gram.quad_form(&ds.gamma)
        + gram.trace_product(&state.doc_cov);
    let weight_prior = -0.5 * k_total as f64 * (ln2pi - tau.ln()) - 0.5 * tau * sq_dist;

    let num_tokens: u32 = ds.topic_counts.iter().sum();
    let assignments = if num_tokens == 0 || noise.is_empty() {
        0.0
    } else {
        let linear: f64 = ds.topic_counts.iter().zip(&ds.xi).map(|(&n, &x)| n as f64 * x).sum();
        let mut eta = vec![0.0; k_total];
        let mean_lse = noise
            .iter()
            .map(|eps| {
                for k in 0..k_total {
                    eta[k] = ds.xi[k] + sigma * eps[k];
                }
                log_sum_exp(&eta)
            })
            .sum::<f64>()
            / noise.len() as f64;
        linear - num_tokens as f64 * mean_lse
    };

    let words = doc
        .tokens
        .iter()
        .zip(&ds.assignments)
        .map(|(&w, &z)| {
            let k = z as usize;
            psi(state.words.value(k, w)) - psi(state.words.total(k))
        })
        .sum();

    let embedding_entropy = 0.5 * m as f64 * (1.0 + ln2pi) + 0.5 * state.doc_cov_log_det();
    let weight_entropy = 0.5 * k_total as f64 * (1.0 + ln2pi) + k_total as f64 * sigma.ln();

    LocalElbo {
        embedding_prior,
        weight_prior,
        assignments,
        words,
        embedding_entropy,
        weight_entropy,
    }
}
