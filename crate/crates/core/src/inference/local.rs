use super::elbo::estimate_local_elbo;
use super::sampler::TopicSampler;
use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::model::{DocState, GlobalState, ModelConfig};
use crate::numerics::{softmax_in_place, RandomStream};
use crate::sparsity::topk_select;

const ADAGRAD_FLOOR: f64 = 1e-8;

/// Diagnostics of one document's inner loop.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalStepReport {
    pub iterations: usize,
    /// `‖Δξ‖∞` of the last step taken.
    pub final_change: f64,
    /// Monte Carlo estimate of the document's ELBO terms at the final state.
    pub elbo: f64,
}

/// `γ_d = τ Σ^(a) Σ_k ξ_dk μ_k`
pub fn update_gamma(xi: &[f64], state: &GlobalState, config: &ModelConfig) -> Vec<f64> {
    let m = state.embed_dim();
    let mut acc = vec![0.0; m];
    for (k, &x) in xi.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (a, &u) in acc.iter_mut().zip(state.topic_mean(k)) {
            *a += x * u;
        }
    }
    let mut gamma = state.doc_cov.mul_vec(&acc);
    for g in &mut gamma {
        *g *= config.tau;
    }
    gamma
}

/// Draws the `T × K` standard normal noise used by [`grad_xi`].
pub fn draw_noise(num_topics: usize, samples: usize, rng: &mut RandomStream) -> Vec<Vec<f64>> {
    (0..samples)
        .map(|_| (0..num_topics).map(|_| rng.standard_normal()).collect())
        .collect()
}

/// Stochastic gradient of the document ELBO with respect to `ξ_d`:
/// `τ(μγ − ξ) + n_d − (N_d/T) Σ_t softmax(ξ + σ ε_t)`, with `T` from the config.
pub fn grad_xi(
    xi: &[f64],
    gamma: &[f64],
    topic_counts: &[u32],
    sigma: f64,
    state: &GlobalState,
    config: &ModelConfig,
    rng: &mut RandomStream,
) -> Vec<f64> {
    let noise = draw_noise(xi.len(), config.mc_samples, rng);
    grad_xi_with_noise(xi, gamma, topic_counts, sigma, state, config.tau, &noise)
}

/// [`grad_xi`] with caller-supplied noise vectors, one per sample.
pub fn grad_xi_with_noise(
    xi: &[f64],
    gamma: &[f64],
    topic_counts: &[u32],
    sigma: f64,
    state: &GlobalState,
    tau: f64,
    noise: &[Vec<f64>],
) -> Vec<f64> {
    let k_total = xi.len();
    let mut grad = vec![0.0; k_total];
    state.project(gamma, &mut grad);
    let num_tokens: u32 = topic_counts.iter().sum();
    for k in 0..k_total {
        grad[k] = tau * (grad[k] - xi[k]) + topic_counts[k] as f64;
    }
    if num_tokens > 0 && !noise.is_empty() {
        let weight = num_tokens as f64 / noise.len() as f64;
        let mut eta = vec![0.0; k_total];
        for eps in noise {
            for k in 0..k_total {
                eta[k] = xi[k] + sigma * eps[k];
            }
            softmax_in_place(&mut eta);
            for k in 0..k_total {
                grad[k] -= weight * eta[k];
            }
        }
    }
    grad
}

/// Per-document inner loop: alternate token sampling, the `γ` update, and
/// one Adagrad step on `ξ` until `‖Δξ‖∞` drops below the inner tolerance.
pub fn local_step(
    doc: &Document,
    state: &GlobalState,
    config: &ModelConfig,
    rng: &mut RandomStream,
) -> Result<(DocState, LocalStepReport)> {
    if doc.is_empty() {
        return Err(Error::Empty("local step on an empty document".into()));
    }
    let k_total = config.num_topics;
    let mut ds = DocState::new(config, doc.len());
    let mut sampler = TopicSampler::new(k_total);
    let mut prior = vec![0.0; k_total];
    let mut grad = vec![0.0; k_total];
    let mut eta = vec![0.0; k_total];
    let mut iterations = 0;
    let mut final_change = f64::INFINITY;

    for _ in 0..config.max_inner_iters {
        iterations += 1;
        let view = topk_select(&ds.xi, config.doc_top_topics);
        ds.topic_counts.iter_mut().for_each(|c| *c = 0);
        for (z, &w) in ds.assignments.iter_mut().zip(&doc.tokens) {
            let k = sampler.sample(w, &view, &state.words, rng)?;
            *z = k;
            ds.topic_counts[k as usize] += 1;
        }
        ds.gamma = update_gamma(&ds.xi, state, config);

        state.project(&ds.gamma, &mut prior);
        for k in 0..k_total {
            grad[k] = config.tau * (prior[k] - ds.xi[k]) + ds.topic_counts[k] as f64;
        }
        let weight = doc.len() as f64 / config.mc_samples as f64;
        for _ in 0..config.mc_samples {
            for k in 0..k_total {
                eta[k] = ds.xi[k] + ds.sigma * rng.standard_normal();
            }
            softmax_in_place(&mut eta);
            for k in 0..k_total {
                grad[k] -= weight * eta[k];
            }
        }

        let mut change: f64 = 0.0;
        for k in 0..k_total {
            ds.grad_sq[k] += grad[k] * grad[k];
            let step = config.adagrad_step * grad[k] / ds.grad_sq[k].max(ADAGRAD_FLOOR).sqrt();
            ds.xi[k] += step;
            change = change.max(step.abs());
        }
        final_change = change;
        if change < config.inner_tol {
            break;
        }
    }
    ds.gamma = update_gamma(&ds.xi, state, config);
    let elbo = estimate_local_elbo(&ds, doc, state, config, rng, config.mc_samples).total();
    Ok((
        ds,
        LocalStepReport {
            iterations,
            final_change,
            elbo,
        },
    ))
}
