//! Bag-of-words corpora: loading, preprocessing, splitting, and synthesis.

mod synthetic;
mod uci;

use std::collections::HashSet;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::numerics::RandomStream;

pub use synthetic::{
    generate_synthetic, generate_synthetic_with_embeddings, sample_dirichlet, sample_document_latents, SyntheticTruth,
};
pub use uci::{load_labels, load_uci_bow, write_labels, write_uci_bow};

/// One document as a list of word ids, expanded from counts.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Document {
    pub tokens: Vec<u32>,
    pub label: Option<u32>,
}

impl Document {
    pub fn new(tokens: Vec<u32>) -> Self {
        Self { tokens, label: None }
    }

    pub fn with_label(tokens: Vec<u32>, label: u32) -> Self {
        Self {
            tokens,
            label: Some(label),
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Sorted `(word, count)` pairs.
    pub fn word_counts(&self) -> Vec<(u32, u32)> {
        let mut sorted = self.tokens.clone();
        sorted.sort_unstable();
        let mut out: Vec<(u32, u32)> = Vec::new();
        for w in sorted {
            match out.last_mut() {
                Some((last, c)) if *last == w => *c += 1,
                _ => out.push((w, 1)),
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Corpus {
    pub docs: Vec<Document>,
    /// Word strings; the index is the word id.
    pub vocab: Vec<String>,
}

impl Corpus {
    /// Checks that every token is a valid word id.
    pub fn new(docs: Vec<Document>, vocab: Vec<String>) -> Result<Self> {
        let corpus = Self { docs, vocab };
        let v = corpus.num_words() as u32;
        for (d, doc) in corpus.docs.iter().enumerate() {
            if let Some(bad) = doc.tokens.iter().find(|&&w| w >= v) {
                return Err(Error::Shape(format!("document {d} has word id {bad} >= V={v}")));
            }
        }
        Ok(corpus)
    }

    /// Corpus over placeholder words `w0 .. w{V-1}`.
    pub fn with_anonymous_vocab(docs: Vec<Document>, num_words: usize) -> Result<Self> {
        Self::new(docs, (0..num_words).map(|i| format!("w{i}")).collect())
    }

    #[inline]
    pub fn num_docs(&self) -> usize {
        self.docs.len()
    }

    #[inline]
    pub fn num_words(&self) -> usize {
        self.vocab.len()
    }

    pub fn num_tokens(&self) -> usize {
        self.docs.iter().map(Document::len).sum()
    }

    pub fn has_labels(&self) -> bool {
        !self.docs.is_empty() && self.docs.iter().all(|d| d.label.is_some())
    }

    pub fn word_frequencies(&self) -> Vec<u64> {
        let mut freq = vec![0u64; self.num_words()];
        for doc in &self.docs {
            for &w in &doc.tokens {
                freq[w as usize] += 1;
            }
        }
        freq
    }

    /// Sub-corpus of the given document indices, sharing the vocabulary.
    pub fn subset(&self, indices: &[usize]) -> Corpus {
        Corpus {
            docs: indices.iter().map(|&i| self.docs[i].clone()).collect(),
            vocab: self.vocab.clone(),
        }
    }
}

/// Keeps the `top_n` most frequent words that are not stop words, remapping
/// ids densely in original-id order. Frequency ties go to the smaller
/// original id. Tokens of removed words are dropped; documents may become
/// empty.
pub fn truncate_vocab(corpus: &Corpus, top_n: usize, stopwords: Option<&[String]>) -> Corpus {
    let stop: HashSet<&str> = stopwords
        .map(|s| s.iter().map(String::as_str).collect())
        .unwrap_or_default();
    let freq = corpus.word_frequencies();
    let mut candidates: Vec<usize> = (0..corpus.num_words())
        .filter(|&w| !stop.contains(corpus.vocab[w].as_str()))
        .collect();
    candidates.sort_by(|&a, &b| freq[b].cmp(&freq[a]).then(a.cmp(&b)));
    candidates.truncate(top_n);
    candidates.sort_unstable();

    let mut remap = vec![u32::MAX; corpus.num_words()];
    for (new, &old) in candidates.iter().enumerate() {
        remap[old] = new as u32;
    }
    let docs = corpus
        .docs
        .iter()
        .map(|d| Document {
            tokens: d
                .tokens
                .iter()
                .map(|&w| remap[w as usize])
                .filter(|&w| w != u32::MAX)
                .collect(),
            label: d.label,
        })
        .collect();
    Corpus {
        docs,
        vocab: candidates.iter().map(|&w| corpus.vocab[w].clone()).collect(),
    }
}

/// Uniform random train/test partition; both sides keep original order.
pub fn split_corpus(corpus: &Corpus, test_fraction: f64, seed: u64) -> Result<(Corpus, Corpus)> {
    let (train_idx, test_idx) = split_indices(corpus.num_docs(), test_fraction, seed)?;
    Ok((corpus.subset(&train_idx), corpus.subset(&test_idx)))
}

/// The `(train, test)` document indices behind [`split_corpus`], each sorted.
pub fn split_indices(num_docs: usize, test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Domain(format!(
            "test fraction must be in (0, 1), got {test_fraction}"
        )));
    }
    let d = num_docs;
    let n_test = (d as f64 * test_fraction).round() as usize;
    if n_test == 0 || n_test == d {
        return Err(Error::Empty(format!(
            "splitting {d} documents at fraction {test_fraction} leaves one side empty"
        )));
    }
    let mut order: Vec<usize> = (0..d).collect();
    order.shuffle(&mut RandomStream::new(seed, SPLIT_CORPUS_STREAM));
    let mut test_idx = order[..n_test].to_vec();
    let mut train_idx = order[n_test..].to_vec();
    test_idx.sort_unstable();
    train_idx.sort_unstable();
    Ok((train_idx, test_idx))
}

/// Token-level random split into observed and held-out parts, both non-empty.
pub fn split_document(doc: &Document, observed_fraction: f64, seed: u64) -> Result<(Document, Document)> {
    let n = doc.len();
    if n < 2 {
        return Err(Error::Domain(format!("cannot split a document of {n} token(s)")));
    }
    if !(observed_fraction > 0.0 && observed_fraction < 1.0) {
        return Err(Error::Domain(format!(
            "observed fraction must be in (0, 1), got {observed_fraction}"
        )));
    }
    let n_obs = ((n as f64 * observed_fraction).round() as usize).clamp(1, n - 1);
    let mut positions: Vec<usize> = (0..n).collect();
    positions.shuffle(&mut RandomStream::new(seed, SPLIT_DOCUMENT_STREAM));
    let mut observed = vec![false; n];
    for &p in &positions[..n_obs] {
        observed[p] = true;
    }
    let (mut obs, mut held) = (Vec::with_capacity(n_obs), Vec::with_capacity(n - n_obs));
    for (i, &w) in doc.tokens.iter().enumerate() {
        if observed[i] {
            obs.push(w);
        } else {
            held.push(w);
        }
    }
    Ok((
        Document {
            tokens: obs,
            label: doc.label,
        },
        Document {
            tokens: held,
            label: doc.label,
        },
    ))
}

const SPLIT_CORPUS_STREAM: u64 = 0x5350_4c49_5443;
const SPLIT_DOCUMENT_STREAM: u64 = 0x5350_4c49_5444;

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Corpus {
        // a:5, b:3, c:1
        let docs = vec![Document::new(vec![0, 0, 0, 1, 2]), Document::new(vec![0, 0, 1, 1])];
        Corpus::new(docs, vec!["a".into(), "b".into(), "c".into()]).unwrap()
    }

    #[test]
    fn truncation_keeps_most_frequent() {
        let t = truncate_vocab(&toy(), 2, None);
        assert_eq!(t.vocab, vec!["a", "b"]);
        assert_eq!(t.docs[0].tokens, vec![0, 0, 0, 1]);
        assert_eq!(t.num_tokens(), 8);
    }

    #[test]
    fn truncation_tie_prefers_smaller_id() {
        let c = Corpus::new(
            vec![Document::new(vec![1, 0, 1, 0, 0, 1])],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        let t = truncate_vocab(&c, 1, None);
        assert_eq!(t.vocab, vec!["a"]);
        assert_eq!(t.docs[0].tokens, vec![0, 0, 0]);
    }

    #[test]
    fn truncation_with_stopwords_can_empty_documents() {
        let c = Corpus::new(
            vec![Document::new(vec![0, 0]), Document::new(vec![1])],
            vec!["the".into(), "cat".into()],
        )
        .unwrap();
        let t = truncate_vocab(&c, 5, Some(&["the".to_string()]));
        assert_eq!(t.vocab, vec!["cat"]);
        assert!(t.docs[0].is_empty());
        assert_eq!(t.docs[1].tokens, vec![0]);
    }

    #[test]
    fn corpus_split_sizes_and_determinism() {
        let docs = (0..10).map(|i| Document::with_label(vec![i], i)).collect();
        let c = Corpus::with_anonymous_vocab(docs, 10).unwrap();
        let (train, test) = split_corpus(&c, 0.1, 7).unwrap();
        assert_eq!((train.num_docs(), test.num_docs()), (9, 1));
        let (train2, test2) = split_corpus(&c, 0.1, 7).unwrap();
        assert_eq!(train, train2);
        assert_eq!(test, test2);
        let mut all: Vec<u32> = train.docs.iter().chain(&test.docs).map(|d| d.label.unwrap()).collect();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
        // labels travel with their documents
        assert!(test.docs.iter().all(|d| d.tokens[0] == d.label.unwrap()));
    }

    #[test]
    fn corpus_split_rejects_empty_side() {
        let c = Corpus::with_anonymous_vocab(vec![Document::new(vec![0]); 3], 1).unwrap();
        assert!(split_corpus(&c, 0.1, 1).is_err());
        assert!(split_corpus(&c, 1.0, 1).is_err());
    }

    #[test]
    fn document_split_examples() {
        let (o, h) = split_document(&Document::new(vec![0, 1, 2, 3]), 0.5, 3).unwrap();
        assert_eq!((o.len(), h.len()), (2, 2));
        let doc = Document::new((0..10).collect());
        let (o, h) = split_document(&doc, 0.8, 3).unwrap();
        assert_eq!((o.len(), h.len()), (8, 2));
        let mut merged: Vec<u32> = o.tokens.iter().chain(&h.tokens).copied().collect();
        merged.sort_unstable();
        assert_eq!(merged, doc.tokens);
        assert_eq!(split_document(&doc, 0.8, 3).unwrap(), (o, h));
        assert!(split_document(&Document::new(vec![5]), 0.5, 1).is_err());
    }

    #[test]
    fn document_split_keeps_both_sides_nonempty() {
        let doc = Document::new(vec![4, 4]);
        let (o, h) = split_document(&doc, 0.99, 0).unwrap();
        assert_eq!((o.len(), h.len()), (1, 1));
    }

    #[test]
    fn word_counts_are_sorted() {
        let d = Document::new(vec![3, 1, 3, 3, 0]);
        assert_eq!(d.word_counts(), vec![(0, 1), (1, 1), (3, 3)]);
    }

    #[test]
    fn new_rejects_out_of_range_ids() {
        assert!(Corpus::with_anonymous_vocab(vec![Document::new(vec![3])], 3).is_err());
    }
}
