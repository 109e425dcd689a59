#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use topic_embedding::corpus::{generate_synthetic, write_labels, write_uci_bow, Corpus, SyntheticTruth};
use topic_embedding::model::ModelConfig;

pub struct CorpusFiles {
    pub docword: PathBuf,
    pub vocab: PathBuf,
    pub labels: PathBuf,
}

/// Synthetic corpus on disk, labeled by each document's dominant topic.
pub fn write_synthetic(
    dir: &Path,
    k: usize,
    v: usize,
    docs: usize,
    seed: u64,
) -> (CorpusFiles, Corpus, SyntheticTruth) {
    let mut c = ModelConfig::new(k);
    c.embed_dim = 2;
    c.alpha = 1.0;
    c.rho = 0.5;
    c.beta = 0.05;
    c.topic_top_words = v;
    let (mut corpus, truth) = generate_synthetic(&c, v, docs, 40, seed).unwrap();
    for (doc, eta) in corpus.docs.iter_mut().zip(&truth.topic_weights) {
        let top = (0..k).max_by(|&a, &b| eta[a].total_cmp(&eta[b])).unwrap();
        doc.label = Some(top as u32);
    }
    let files = CorpusFiles {
        docword: dir.join("docword.txt"),
        vocab: dir.join("vocab.txt"),
        labels: dir.join("labels.txt"),
    };
    write_uci_bow(&corpus, &files.docword, &files.vocab).unwrap();
    write_labels(&corpus, &files.labels).unwrap();
    (files, corpus, truth)
}

pub fn topic_embed<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(env!("CARGO_BIN_EXE_topic-embed"))
        .args(args)
        .output()
        .unwrap()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn read(path: impl AsRef<Path>) -> String {
    std::fs::read_to_string(path.as_ref()).unwrap_or_else(|e| panic!("{}: {e}", path.as_ref().display()))
}

/// Args for a small, quick training run.
pub fn train_args(files: &CorpusFiles, out: &Path, k: usize) -> Vec<String> {
    [
        "--docword",
        files.docword.to_str().unwrap(),
        "--vocab",
        files.vocab.to_str().unwrap(),
        "--labels",
        files.labels.to_str().unwrap(),
        "--k",
        &k.to_string(),
        "--m",
        "2",
        "--vs",
        "30",
        "--batch",
        "50",
        "--max-epochs",
        "3",
        "--seed",
        "11",
        "--workers",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}
