use crate::error::{Error, Result};
use crate::numerics::RandomStream;

/// Reusable set of topic ids with O(1) clear.
#[derive(Debug, Clone)]
pub struct TopicMask {
    stamps: Vec<u32>,
    epoch: u32,
    members: Vec<u32>,
}

impl TopicMask {
    pub fn new(num_topics: usize) -> Self {
        Self {
            stamps: vec![0; num_topics],
            epoch: 1,
            members: Vec::new(),
        }
    }

    pub fn from_topics(num_topics: usize, topics: &[u32]) -> Self {
        let mut m = Self::new(num_topics);
        for &k in topics {
            m.insert(k);
        }
        m
    }

    pub fn clear(&mut self) {
        self.members.clear();
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamps.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
    }

    /// Returns true if `k` was not already present.
    #[inline]
    pub fn insert(&mut self, k: u32) -> bool {
        let slot = &mut self.stamps[k as usize];
        if *slot == self.epoch {
            false
        } else {
            *slot = self.epoch;
            self.members.push(k);
            true
        }
    }

    #[inline]
    pub fn contains(&self, k: u32) -> bool {
        self.stamps[k as usize] == self.epoch
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.members.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[u32] {
        &self.members
    }

    pub fn capacity(&self) -> usize {
        self.stamps.len()
    }
}

/// Categorical sampler over per-topic residual weights via a cumulative
/// array and binary search.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSampler {
    weights: Vec<f64>,
    cumulative: Vec<f64>,
}

const MAX_REJECTIONS: usize = 64;

impl ResidualSampler {
    pub fn from_weights(weights: Vec<f64>) -> Self {
        let mut acc = 0.0;
        let cumulative = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Self { weights, cumulative }
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    #[inline]
    pub fn weight(&self, k: usize) -> f64 {
        self.weights[k]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Draws `k ∉ exclude` with probability `w_k / Σ_{j ∉ exclude} w_j`.
    ///
    /// Uses rejection on the full cumulative array, then falls back to a
    /// linear scan of the allowed topics if rejections keep hitting the
    /// excluded set.
    pub fn draw(&self, exclude: &TopicMask, rng: &mut RandomStream) -> Result<u32> {
        let total = self.total();
        if exclude.len() >= self.len() || !(total > 0.0) {
            return Err(Error::Sampling("residual draw with all mass excluded".into()));
        }
        for _ in 0..MAX_REJECTIONS {
            let u = rng.uniform() * total;
            let k = self.cumulative.partition_point(|&c| c <= u);
            if k >= self.len() {
                continue;
            }
            if !exclude.contains(k as u32) {
                return Ok(k as u32);
            }
        }
        let allowed: f64 = (0..self.len())
            .filter(|&k| !exclude.contains(k as u32))
            .map(|k| self.weights[k])
            .sum();
        if !(allowed > 0.0) {
            return Err(Error::Sampling("residual draw with all mass excluded".into()));
        }
        let u = rng.uniform() * allowed;
        let mut acc = 0.0;
        let mut last = None;
        for k in 0..self.len() {
            if exclude.contains(k as u32) || self.weights[k] <= 0.0 {
                continue;
            }
            acc += self.weights[k];
            last = Some(k as u32);
            if u < acc {
                return Ok(k as u32);
            }
        }
        last.ok_or_else(|| Error::Sampling("residual draw with all mass excluded".into()))
    }
}

/// Draws from `sampler` excluding the given topic ids.
pub fn residual_draw(sampler: &ResidualSampler, exclude: &[u32], rng: &mut RandomStream) -> Result<u32> {
    let mask = TopicMask::from_topics(sampler.len(), exclude);
    sampler.draw(&mask, rng)
}
