use crate::error::{Error, Result};
use crate::numerics::RandomStream;
use crate::sparsity::{TopKView, TopicMask, TruncatedTopicWords};

/// Sparse draw of one token's topic with reusable scratch space.
///
/// The support is the document's top topics plus the topics retaining the
/// word. Everything else shares one residual bucket, whose topics all carry
/// the view's default weight and the implicit `β` word factor.
#[derive(Debug, Clone)]
pub struct TopicSampler {
    mask: TopicMask,
    support: Vec<u32>,
    log_weights: Vec<f64>,
}

impl TopicSampler {
    pub fn new(num_topics: usize) -> Self {
        Self {
            mask: TopicMask::new(num_topics),
            support: Vec::new(),
            log_weights: Vec::new(),
        }
    }

    pub fn sample(
        &mut self,
        word: u32,
        view: &TopKView,
        words: &TruncatedTopicWords,
        rng: &mut RandomStream,
    ) -> Result<u32> {
        let k_total = words.num_topics();
        self.mask.clear();
        self.support.clear();
        self.log_weights.clear();
        for e in words.word_entries(word) {
            self.mask.insert(e.topic);
            self.support.push(e.topic);
            self.log_weights.push(view.estimate(e.topic as usize) + e.log_weight);
        }
        for &k in &view.indices {
            if self.mask.insert(k) {
                self.support.push(k);
                self.log_weights
                    .push(view.estimate(k as usize) + words.residual_log_weight(k as usize));
            }
        }

        let residual = words.residual_sampler();
        let outside = k_total - self.support.len();
        // scan the complement directly when it is small or when subtraction
        // from the global total would cancel
        let mut direct = outside > 0 && 2 * self.support.len() > k_total;
        let mut outside_mass = 0.0;
        if outside > 0 && !direct {
            let inside: f64 = self.support.iter().map(|&k| residual.weight(k as usize)).sum();
            outside_mass = residual.total() - inside;
            if !(outside_mass > residual.total() * 1e-9) {
                direct = true;
            }
        }
        if direct {
            outside_mass = (0..k_total as u32)
                .filter(|&k| !self.mask.contains(k))
                .map(|k| residual.weight(k as usize))
                .sum();
        }
        let residual_log = if outside > 0 && outside_mass > 0.0 {
            view.default + words.residual_log_scale() + outside_mass.ln()
        } else {
            f64::NEG_INFINITY
        };

        let shift = self.log_weights.iter().copied().fold(residual_log, f64::max);
        if !shift.is_finite() {
            return Err(Error::Sampling(format!("non-finite topic weights for word {word}")));
        }
        let mut total = (residual_log - shift).exp();
        for lw in &mut self.log_weights {
            *lw = (*lw - shift).exp();
            total += *lw;
        }
        if !(total > 0.0) {
            return Err(Error::Sampling(format!("no topic mass for word {word}")));
        }

        let mut u = rng.uniform() * total;
        for (i, &w) in self.log_weights.iter().enumerate() {
            if u < w {
                return Ok(self.support[i]);
            }
            u -= w;
        }
        if residual_log == f64::NEG_INFINITY {
            // rounding pushed u past the last support weight
            return Ok(*self.support.last().expect("non-empty support"));
        }
        if direct {
            let mut u = rng.uniform() * outside_mass;
            let mut last = None;
            for k in 0..k_total as u32 {
                if self.mask.contains(k) {
                    continue;
                }
                let w = residual.weight(k as usize);
                if w <= 0.0 {
                    continue;
                }
                last = Some(k);
                if u < w {
                    return Ok(k);
                }
                u -= w;
            }
            return last.ok_or_else(|| Error::Sampling("empty residual bucket".into()));
        }
        residual.draw(&self.mask, rng)
    }
}

/// One draw from the sparse topic posterior of `word`.
pub fn sample_topic(word: u32, view: &TopKView, words: &TruncatedTopicWords, rng: &mut RandomStream) -> Result<u32> {
    TopicSampler::new(words.num_topics()).sample(word, view, words, rng)
}
