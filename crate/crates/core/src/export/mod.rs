//! Topic correlations, embeddings, and graphs derived from a trained model.
//!
//! Covariances use the posterior expectation `E[u_iᵀu_j] = μ_iᵀμ_j +
//! [i = j] tr Σ^(u)` plus the topic-weight noise `τ⁻¹` on the diagonal.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::evaluation::topic_top_words;
use crate::model::{dot, GlobalState, ModelConfig};

/// Largest `K` for which [`covariance_matrix`] will materialize `K × K`.
pub const MAX_DENSE_TOPICS: usize = 2000;

/// `cov(η_i, η_j)`, `O(M)`.
pub fn topic_covariance_entry(state: &GlobalState, config: &ModelConfig, i: usize, j: usize) -> Result<f64> {
    let k = state.num_topics();
    if i >= k || j >= k {
        return Err(Error::Domain(format!("topic pair ({i}, {j}) out of range (K={k})")));
    }
    let mut cov = dot(state.topic_mean(i), state.topic_mean(j));
    if i == j {
        cov += state.topic_cov.trace() + 1.0 / config.tau;
    }
    Ok(cov)
}

/// Full `K × K` covariance, refused above [`MAX_DENSE_TOPICS`].
pub fn covariance_matrix(state: &GlobalState, config: &ModelConfig) -> Result<Vec<Vec<f64>>> {
    let k = state.num_topics();
    if k > MAX_DENSE_TOPICS {
        return Err(Error::Domain(format!(
            "refusing to materialize a {k} x {k} covariance (limit {MAX_DENSE_TOPICS})"
        )));
    }
    (0..k)
        .map(|i| (0..k).map(|j| topic_covariance_entry(state, config, i, j)).collect())
        .collect()
}

/// `r_ij = cov_ij / √(cov_ii cov_jj)`
pub fn topic_correlation(state: &GlobalState, config: &ModelConfig, i: usize, j: usize) -> Result<f64> {
    let cij = topic_covariance_entry(state, config, i, j)?;
    let cii = topic_covariance_entry(state, config, i, i)?;
    let cjj = topic_covariance_entry(state, config, j, j)?;
    Ok((cij / (cii * cjj).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphNode {
    pub topic: u32,
    pub label: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphEdge {
    pub source: u32,
    pub target: u32,
    pub weight: f64,
}

/// Topics joined by edges where their correlation reaches a threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationGraph {
    pub nodes: Vec<GraphNode>,
    /// `source < target`, sorted by `(source, target)`.
    pub edges: Vec<GraphEdge>,
}

/// Edges `r_ij ≥ threshold`, keeping at most `max_degree` strongest per
/// node (greedy by descending `r`, ties by `(i, j)`). Nodes are labeled with
/// their top `label_words` words from `vocab`.
pub fn correlation_graph(
    state: &GlobalState,
    config: &ModelConfig,
    vocab: &[String],
    threshold: f64,
    max_degree: usize,
    label_words: usize,
) -> Result<CorrelationGraph> {
    let k = state.num_topics();
    let diag: Vec<f64> = (0..k)
        .map(|i| topic_covariance_entry(state, config, i, i))
        .collect::<Result<_>>()?;
    let mut candidates = Vec::new();
    for i in 0..k {
        for j in (i + 1)..k {
            let r = (dot(state.topic_mean(i), state.topic_mean(j)) / (diag[i] * diag[j]).sqrt()).clamp(-1.0, 1.0);
            if r >= threshold {
                candidates.push(GraphEdge {
                    source: i as u32,
                    target: j as u32,
                    weight: r,
                });
            }
        }
    }
    candidates.sort_by(|a, b| {
        b.weight
            .total_cmp(&a.weight)
            .then(a.source.cmp(&b.source))
            .then(a.target.cmp(&b.target))
    });
    let mut degree = vec![0usize; k];
    let mut edges: Vec<GraphEdge> = candidates
        .into_iter()
        .filter(|e| {
            let (s, t) = (e.source as usize, e.target as usize);
            if degree[s] < max_degree && degree[t] < max_degree {
                degree[s] += 1;
                degree[t] += 1;
                true
            } else {
                false
            }
        })
        .collect();
    edges.sort_by(|a, b| a.source.cmp(&b.source).then(a.target.cmp(&b.target)));

    let nodes = (0..k)
        .map(|t| {
            let ids = topic_top_words(&state.words, t, label_words)?;
            Ok(GraphNode {
                topic: t as u32,
                label: ids
                    .into_iter()
                    .map(|w| vocab.get(w as usize).cloned().unwrap_or_else(|| format!("w{w}")))
                    .collect(),
            })
        })
        .collect::<Result<_>>()?;
    Ok(CorrelationGraph { nodes, edges })
}

/// Topic embeddings as tab-separated `topic μ_1 … μ_M` lines.
pub fn export_embeddings(state: &GlobalState, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for k in 0..state.num_topics() {
        let _ = write!(out, "{k}");
        for v in state.topic_mean(k) {
            let _ = write!(out, "\t{v}");
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Edge list with a `#` header, one `i j r` line per edge.
pub fn export_edge_list(graph: &CorrelationGraph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from(
        "# topic correlation edges: source target r\n\
         # r = mu_i.mu_j / sqrt(c_ii c_jj), c_ii = |mu_i|^2 + tr Sigma_u + 1/tau\n",
    );
    for e in &graph.edges {
        let _ = writeln!(out, "{} {} {}", e.source, e.target, e.weight);
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Reads an edge list written by [`export_edge_list`].
pub fn read_edge_list(path: impl AsRef<Path>) -> Result<Vec<GraphEdge>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut edges = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        let bad = || Error::parse(path, i + 1, "expected `source target r`");
        if f.len() != 3 {
            return Err(bad());
        }
        edges.push(GraphEdge {
            source: f[0].parse().map_err(|_| bad())?,
            target: f[1].parse().map_err(|_| bad())?,
            weight: f[2].parse().map_err(|_| bad())?,
        });
    }
    Ok(edges)
}

fn gml_string(s: &str) -> String {
    s.replace('&', "&amp;").replace('"', "&quot;")
}

/// GML graph: one `node` record per topic carrying its label words, one
/// `edge` record per edge carrying `weight`.
pub fn export_gml(graph: &CorrelationGraph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("graph [\n  directed 0\n");
    for n in &graph.nodes {
        let _ = writeln!(
            out,
            "  node [\n    id {}\n    label \"{}\"\n  ]",
            n.topic,
            gml_string(&n.label.join(" "))
        );
    }
    for e in &graph.edges {
        let _ = writeln!(
            out,
            "  edge [\n    source {}\n    target {}\n    weight {}\n  ]",
            e.source, e.target, e.weight
        );
    }
    out.push_str("]\n");
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Writes `<stem>.edges` and `<stem>.gml` next to each other.
pub fn export_graph(graph: &CorrelationGraph, stem: impl AsRef<Path>) -> Result<()> {
    let stem = stem.as_ref();
    export_edge_list(graph, stem.with_extension("edges"))?;
    export_gml(graph, stem.with_extension("gml"))
}
