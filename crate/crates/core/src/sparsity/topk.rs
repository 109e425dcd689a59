use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

/// The `K_s` largest entries of a document's topic weights, plus a single
/// default value standing in for all other topics.
#[derive(Debug, Clone, PartialEq)]
pub struct TopKView {
    /// Selected topic ids, by value descending then id ascending.
    pub indices: Vec<u32>,
    pub values: Vec<f64>,
    /// Mean of the non-selected entries; 0 when every topic is selected.
    pub default: f64,
    /// Dense `K` vector: exact value for selected topics, `default` elsewhere.
    estimate: Vec<f64>,
    selected: Vec<bool>,
}

impl TopKView {
    #[inline]
    pub fn num_topics(&self) -> usize {
        self.estimate.len()
    }

    /// Weight used for topic `k` during sparse sampling.
    #[inline]
    pub fn estimate(&self, k: usize) -> f64 {
        self.estimate[k]
    }

    #[inline]
    pub fn is_selected(&self, k: usize) -> bool {
        self.selected[k]
    }

    pub fn max_value(&self) -> f64 {
        self.values.first().copied().unwrap_or(self.default).max(self.default)
    }
}

/// Heap entry ordered so that "greater" means "more deserving of a slot":
/// larger value, then smaller topic id.
#[derive(Debug, Clone, Copy)]
struct Candidate {
    value: f64,
    topic: u32,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.value
            .total_cmp(&other.value)
            .then_with(|| other.topic.cmp(&self.topic))
    }
}

/// Exact top-`K_s` selection with a bounded min-heap, `O(K log K_s)`.
pub fn topk_select(xi: &[f64], top: usize) -> TopKView {
    let k_total = xi.len();
    let top = top.max(1).min(k_total);
    let mut heap: BinaryHeap<Reverse<Candidate>> = BinaryHeap::with_capacity(top + 1);
    for (k, &value) in xi.iter().enumerate() {
        let c = Candidate { value, topic: k as u32 };
        if heap.len() < top {
            heap.push(Reverse(c));
        } else if let Some(mut worst) = heap.peek_mut() {
            if c > worst.0 {
                *worst = Reverse(c);
            }
        }
    }
    let mut chosen: Vec<Candidate> = heap.into_iter().map(|r| r.0).collect();
    chosen.sort_unstable_by(|a, b| b.cmp(a));

    let mut selected = vec![false; k_total];
    for c in &chosen {
        selected[c.topic as usize] = true;
    }
    let rest = k_total - chosen.len();
    let default = if rest == 0 {
        0.0
    } else {
        xi.iter()
            .zip(&selected)
            .filter(|(_, &s)| !s)
            .map(|(v, _)| v)
            .sum::<f64>()
            / rest as f64
    };
    let estimate = xi
        .iter()
        .zip(&selected)
        .map(|(&v, &s)| if s { v } else { default })
        .collect();
    TopKView {
        indices: chosen.iter().map(|c| c.topic).collect(),
        values: chosen.iter().map(|c| c.value).collect(),
        default,
        estimate,
        selected,
    }
}
