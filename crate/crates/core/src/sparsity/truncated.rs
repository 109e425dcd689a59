use super::residual::ResidualSampler;
use crate::numerics::psi;

/// One retained `(topic, word)` entry as seen from the word's side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WordTopicEntry {
    pub topic: u32,
    /// `λ_kv`
    pub value: f64,
    /// `Ψ(λ_kv) − Ψ(Λ_k)`
    pub log_weight: f64,
}

/// Truncated variational word weights `λ`.
///
/// Each topic keeps its largest `V_s` entries plus whatever the per-word
/// floor forces in; every other entry is implicitly `β`. Topic totals count
/// implicit entries, so `Λ_k = Σ retained + (V − retained) β`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedTopicWords {
    num_words: usize,
    beta: f64,
    /// Per topic, sorted by word id.
    rows: Vec<Vec<(u32, f64)>>,
    totals: Vec<f64>,
    /// `Ψ(β) − Ψ(Λ_k)`, the log word factor of every implicit entry.
    residual_log: Vec<f64>,
    /// Sampler over `exp(residual_log_k − residual_log_scale)`.
    residual: ResidualSampler,
    residual_log_scale: f64,
    word_offsets: Vec<usize>,
    word_entries: Vec<WordTopicEntry>,
}

impl TruncatedTopicWords {
    #[inline]
    pub fn num_topics(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn num_words(&self) -> usize {
        self.num_words
    }

    #[inline]
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Retained `(word, λ)` entries of topic `k`, sorted by word id.
    pub fn row(&self, k: usize) -> &[(u32, f64)] {
        &self.rows[k]
    }

    pub fn rows(&self) -> &[Vec<(u32, f64)>] {
        &self.rows
    }

    /// `λ_kv`, `β` when not retained.
    pub fn value(&self, k: usize, v: u32) -> f64 {
        let row = &self.rows[k];
        match row.binary_search_by_key(&v, |e| e.0) {
            Ok(i) => row[i].1,
            Err(_) => self.beta,
        }
    }

    pub fn is_retained(&self, k: usize, v: u32) -> bool {
        self.rows[k].binary_search_by_key(&v, |e| e.0).is_ok()
    }

    /// `Λ_k = Σ_v λ_kv`
    #[inline]
    pub fn total(&self, k: usize) -> f64 {
        self.totals[k]
    }

    pub fn totals(&self) -> &[f64] {
        &self.totals
    }

    /// `c_k = exp(Ψ(β) − Ψ(Λ_k))`. May underflow to zero for tiny `β`;
    /// the sampler works with [`residual_log_weight`](Self::residual_log_weight).
    pub fn residual_weight(&self, k: usize) -> f64 {
        self.residual_log[k].exp()
    }

    #[inline]
    pub fn residual_log_weight(&self, k: usize) -> f64 {
        self.residual_log[k]
    }

    /// Sampler over `c_k` scaled by `exp(−residual_log_scale)`.
    pub fn residual_sampler(&self) -> &ResidualSampler {
        &self.residual
    }

    #[inline]
    pub fn residual_log_scale(&self) -> f64 {
        self.residual_log_scale
    }

    /// Topics retaining word `v`, sorted by topic id.
    #[inline]
    pub fn word_entries(&self, v: u32) -> &[WordTopicEntry] {
        let v = v as usize;
        &self.word_entries[self.word_offsets[v]..self.word_offsets[v + 1]]
    }

    pub fn retained_entries(&self) -> usize {
        self.word_entries.len()
    }

    /// Dense `K × V` reconstruction, for tests and small models.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|row| {
                let mut dense = vec![self.beta; self.num_words];
                for &(w, v) in row {
                    dense[w as usize] = v;
                }
                dense
            })
            .collect()
    }

    /// Raw entries of `(1 − rate) λ + rate (β + counts)`, the input to the
    /// next [`rebuild_truncation`]. Entries absent from both sides stay `β`
    /// and are left implicit.
    pub fn blend_with_counts(&self, counts: &[Vec<(u32, f64)>], rate: f64) -> Vec<Vec<(u32, f64)>> {
        let beta = self.beta;
        self.rows
            .iter()
            .zip(counts)
            .map(|(old, new)| {
                let mut sorted_new = new.clone();
                sorted_new.sort_unstable_by_key(|e| e.0);
                let mut out = Vec::with_capacity(old.len() + sorted_new.len());
                let (mut i, mut j) = (0, 0);
                while i < old.len() || j < sorted_new.len() {
                    let take_old = j >= sorted_new.len() || (i < old.len() && old[i].0 < sorted_new[j].0);
                    let take_new = i >= old.len() || (j < sorted_new.len() && sorted_new[j].0 < old[i].0);
                    let (w, old_v, count) = if take_old {
                        i += 1;
                        (old[i - 1].0, old[i - 1].1, 0.0)
                    } else if take_new {
                        j += 1;
                        (sorted_new[j - 1].0, beta, sorted_new[j - 1].1)
                    } else {
                        i += 1;
                        j += 1;
                        (old[i - 1].0, old[i - 1].1, sorted_new[j - 1].1)
                    };
                    out.push((w, (1.0 - rate) * old_v + rate * (beta + count)));
                }
                out
            })
            .collect()
    }
}

/// Rebuilds the truncated store from raw per-topic `(word, λ)` lists.
///
/// Each topic keeps its top `top_words` values (ties to the smaller word id).
/// Then every word retained by fewer than `min(min_topics, K)` topics gets
/// its largest dropped entries forced back in (ties to the smaller topic id),
/// with implicit `β` entries as the last resort. Forced entries are added on
/// top of the per-topic budget rather than evicting anything.
pub fn rebuild_truncation(
    raw: Vec<Vec<(u32, f64)>>,
    top_words: usize,
    min_topics: usize,
    beta: f64,
    num_words: usize,
) -> TruncatedTopicWords {
    let k_total = raw.len();
    let mut rows: Vec<Vec<(u32, f64)>> = Vec::with_capacity(k_total);
    let mut dropped: Vec<(u32, u32, f64)> = Vec::new(); // (word, topic, value)
    let mut coverage = vec![0u32; num_words];

    for (k, mut row) in raw.into_iter().enumerate() {
        for e in &mut row {
            debug_assert!((e.0 as usize) < num_words);
            e.1 = e.1.max(beta);
        }
        row.sort_unstable_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        if row.len() > top_words {
            for &(w, v) in &row[top_words..] {
                dropped.push((w, k as u32, v));
            }
            row.truncate(top_words);
        }
        for &(w, _) in &row {
            coverage[w as usize] += 1;
        }
        rows.push(row);
    }

    let need = min_topics.min(k_total) as u32;
    if need > 0 && coverage.iter().any(|&c| c < need) {
        // topics currently retaining each word
        let mut retained_by_word: Vec<Vec<u32>> = vec![Vec::new(); num_words];
        for (k, row) in rows.iter().enumerate() {
            for &(w, _) in row {
                if coverage[w as usize] < need {
                    retained_by_word[w as usize].push(k as u32);
                }
            }
        }
        dropped.sort_unstable_by(|a, b| a.0.cmp(&b.0).then(b.2.total_cmp(&a.2)).then(a.1.cmp(&b.1)));
        let mut start = 0;
        let mut forced: Vec<(u32, u32, f64)> = Vec::new();
        for w in 0..num_words as u32 {
            let end = start + dropped[start..].partition_point(|e| e.0 == w);
            let have = coverage[w as usize];
            if have < need {
                let mut missing = (need - have) as usize;
                // dropped entries are sorted by value, then topic id
                for e in dropped[start..end].iter().take(missing) {
                    forced.push((w, e.1, e.2));
                }
                missing -= missing.min(end - start);
                // implicit β entries from the smallest topic ids not yet holding w
                let held = &retained_by_word[w as usize];
                let mut k = 0u32;
                while missing > 0 && (k as usize) < k_total {
                    if !held.contains(&k) && !dropped[start..end].iter().any(|e| e.1 == k) {
                        forced.push((w, k, beta));
                        missing -= 1;
                    }
                    k += 1;
                }
            }
            start = end;
        }
        for (w, k, v) in forced {
            rows[k as usize].push((w, v));
        }
    }

    for row in &mut rows {
        row.sort_unstable_by_key(|e| e.0);
    }
    finish(rows, beta, num_words)
}

/// Builds all derived structures from rows already sorted by word id.
pub(crate) fn finish(rows: Vec<Vec<(u32, f64)>>, beta: f64, num_words: usize) -> TruncatedTopicWords {
    let psi_beta = psi(beta);
    let totals: Vec<f64> = rows
        .iter()
        .map(|row| row.iter().map(|e| e.1).sum::<f64>() + (num_words - row.len()) as f64 * beta)
        .collect();
    let psi_totals: Vec<f64> = totals.iter().map(|&t| psi(t)).collect();
    let residual_log: Vec<f64> = psi_totals.iter().map(|p| psi_beta - p).collect();
    let residual_log_scale = residual_log.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let residual_log_scale = if residual_log_scale.is_finite() {
        residual_log_scale
    } else {
        0.0
    };
    let residual = ResidualSampler::from_weights(residual_log.iter().map(|l| (l - residual_log_scale).exp()).collect());

    let mut word_offsets = vec![0usize; num_words + 1];
    for row in &rows {
        for &(w, _) in row {
            word_offsets[w as usize + 1] += 1;
        }
    }
    for v in 0..num_words {
        word_offsets[v + 1] += word_offsets[v];
    }
    let mut cursor = word_offsets.clone();
    let mut word_entries = vec![
        WordTopicEntry {
            topic: 0,
            value: 0.0,
            log_weight: 0.0
        };
        word_offsets[num_words]
    ];
    for (k, row) in rows.iter().enumerate() {
        for &(w, value) in row {
            let slot = &mut cursor[w as usize];
            word_entries[*slot] = WordTopicEntry {
                topic: k as u32,
                value,
                log_weight: psi(value) - psi_totals[k],
            };
            *slot += 1;
        }
    }

    TruncatedTopicWords {
        num_words,
        beta,
        rows,
        totals,
        residual_log,
        residual,
        residual_log_scale,
        word_offsets,
        word_entries,
    }
}
