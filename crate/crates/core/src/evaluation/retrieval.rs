use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrPoint {
    pub cutoff: usize,
    pub recall: f64,
    pub precision: f64,
}

/// Mean precision and recall at each rank cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct PrCurve {
    pub points: Vec<PrPoint>,
    /// Queries that had at least one relevant base document.
    pub num_queries: usize,
}

impl PrCurve {
    pub fn precision_at(&self, cutoff: usize) -> Option<f64> {
        self.points.iter().find(|p| p.cutoff == cutoff).map(|p| p.precision)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Ranks base documents by inner product with each query (ties to the
/// smaller base index); a base document is relevant when its label equals
/// the query's. Cutoffs are sorted, deduplicated, and clamped to the base
/// size. Queries with no relevant base document are left out of the average.
pub fn retrieval_pr(
    query: &[Vec<f64>],
    base: &[Vec<f64>],
    query_labels: &[u32],
    base_labels: &[u32],
    cutoffs: &[usize],
) -> Result<PrCurve> {
    if query.len() != query_labels.len() || base.len() != base_labels.len() {
        return Err(Error::Shape("feature and label counts differ".into()));
    }
    let dim = query.first().or(base.first()).map_or(0, Vec::len);
    if query.iter().chain(base).any(|r| r.len() != dim) {
        return Err(Error::Shape(format!("all feature rows must have dimension {dim}")));
    }
    if base.is_empty() {
        return Err(Error::Empty("empty retrieval base".into()));
    }
    let mut cuts: Vec<usize> = cutoffs.iter().map(|&c| c.clamp(1, base.len())).collect();
    cuts.sort_unstable();
    cuts.dedup();

    let mut recall_sum = vec![0.0; cuts.len()];
    let mut precision_sum = vec![0.0; cuts.len()];
    let mut num_queries = 0;
    let mut order: Vec<usize> = (0..base.len()).collect();
    let mut scores = vec![0.0; base.len()];
    for (q, &label) in query.iter().zip(query_labels) {
        let relevant = base_labels.iter().filter(|&&l| l == label).count();
        if relevant == 0 {
            continue;
        }
        num_queries += 1;
        for (s, b) in scores.iter_mut().zip(base) {
            *s = dot(q, b);
        }
        order.iter_mut().enumerate().for_each(|(i, o)| *o = i);
        let deepest = *cuts.last().unwrap();
        let by_score = |&a: &usize, &b: &usize| scores[b].total_cmp(&scores[a]).then(a.cmp(&b));
        if deepest < order.len() {
            order.select_nth_unstable_by(deepest - 1, by_score);
            order[..deepest].sort_unstable_by(by_score);
        } else {
            order.sort_unstable_by(by_score);
        }
        let mut hits = 0;
        let mut c = 0;
        for (rank, &d) in order.iter().take(deepest).enumerate() {
            if base_labels[d] == label {
                hits += 1;
            }
            while c < cuts.len() && cuts[c] == rank + 1 {
                recall_sum[c] += hits as f64 / relevant as f64;
                precision_sum[c] += hits as f64 / cuts[c] as f64;
                c += 1;
            }
        }
    }
    let n = num_queries.max(1) as f64;
    Ok(PrCurve {
        points: cuts
            .iter()
            .enumerate()
            .map(|(i, &cutoff)| PrPoint {
                cutoff,
                recall: recall_sum[i] / n,
                precision: precision_sum[i] / n,
            })
            .collect(),
        num_queries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_vector_ranks_first() {
        let q = vec![vec![1.0, 0.0]];
        let base = vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![0.0, -1.0]];
        let curve = retrieval_pr(&q, &base, &[7], &[1, 7, 2], &[1, 3]).unwrap();
        assert_eq!(curve.precision_at(1), Some(1.0));
        assert_eq!(curve.points[1].recall, 1.0);
    }

    #[test]
    fn single_label_is_always_precise() {
        let q = vec![vec![0.3], vec![-2.0]];
        let base = vec![vec![1.0], vec![2.0], vec![-1.0]];
        let curve = retrieval_pr(&q, &base, &[0, 0], &[0, 0, 0], &[1, 2, 3, 10]).unwrap();
        assert_eq!(curve.points.len(), 3);
        assert!(curve.points.iter().all(|p| p.precision == 1.0));
        assert!(curve.points.windows(2).all(|w| w[0].recall <= w[1].recall));
    }

    #[test]
    fn dimension_mismatch() {
        assert!(retrieval_pr(&[vec![1.0]], &[vec![1.0, 2.0]], &[0], &[0], &[1]).is_err());
    }
}
