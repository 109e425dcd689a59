//! UCI bag-of-words format: three header lines `D`, `V`, `NNZ`, then
//! `docId wordId count` triples, 1-indexed. The vocabulary file has one
//! word per line.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{Corpus, Document};
use crate::error::{Error, Result};

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

fn parse_header(path: &Path, line_no: usize, line: Option<std::io::Result<String>>, name: &str) -> Result<usize> {
    let line = line
        .ok_or_else(|| Error::parse(path, line_no, format!("missing header line {name}")))?
        .map_err(|e| Error::io(path, e))?;
    line.trim()
        .parse::<usize>()
        .map_err(|_| Error::parse(path, line_no, format!("malformed header {name}: {:?}", line.trim())))
}

pub fn load_uci_bow(docword_path: impl AsRef<Path>, vocab_path: impl AsRef<Path>) -> Result<Corpus> {
    let docword_path = docword_path.as_ref();
    let vocab_path = vocab_path.as_ref();

    let mut lines = open(docword_path)?.lines();
    let num_docs = parse_header(docword_path, 1, lines.next(), "D")?;
    let num_words = parse_header(docword_path, 2, lines.next(), "V")?;
    let nnz = parse_header(docword_path, 3, lines.next(), "NNZ")?;

    let mut docs = vec![Document::default(); num_docs];
    let mut entries = 0usize;
    let mut last_line = 3;
    for (i, line) in lines.enumerate() {
        let line_no = i + 4;
        last_line = line_no;
        let line = line.map_err(|e| Error::io(docword_path, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let mut next = |name: &str| -> Result<i64> {
            fields
                .next()
                .ok_or_else(|| Error::parse(docword_path, line_no, format!("missing {name}")))?
                .parse::<i64>()
                .map_err(|_| Error::parse(docword_path, line_no, format!("malformed {name}")))
        };
        let (doc_id, word_id, count) = (next("docId")?, next("wordId")?, next("count")?);
        if fields.next().is_some() {
            return Err(Error::parse(docword_path, line_no, "expected exactly three fields"));
        }
        if doc_id < 1 || doc_id as usize > num_docs {
            return Err(Error::parse(
                docword_path,
                line_no,
                format!("docId {doc_id} out of range 1..={num_docs}"),
            ));
        }
        if word_id < 1 || word_id as usize > num_words {
            return Err(Error::parse(
                docword_path,
                line_no,
                format!("wordId {word_id} out of range 1..={num_words}"),
            ));
        }
        if count <= 0 {
            return Err(Error::parse(
                docword_path,
                line_no,
                format!("count must be positive, got {count}"),
            ));
        }
        let tokens = &mut docs[doc_id as usize - 1].tokens;
        tokens.extend(std::iter::repeat_n(word_id as u32 - 1, count as usize));
        entries += 1;
    }
    if entries != nnz {
        return Err(Error::parse(
            docword_path,
            last_line,
            format!("header declares NNZ={nnz} but file has {entries} entries"),
        ));
    }

    let mut vocab = Vec::with_capacity(num_words);
    for line in open(vocab_path)?.lines() {
        let line = line.map_err(|e| Error::io(vocab_path, e))?;
        vocab.push(line.trim_end_matches('\r').to_string());
    }
    // tolerate a single trailing blank line
    if vocab.len() == num_words + 1 && vocab.last().is_some_and(|w| w.is_empty()) {
        vocab.pop();
    }
    if vocab.len() != num_words {
        return Err(Error::parse(
            vocab_path,
            vocab.len(),
            format!("vocabulary has {} lines, header declares V={num_words}", vocab.len()),
        ));
    }
    Ok(Corpus { docs, vocab })
}

/// One integer label per line, aligned with document order.
pub fn load_labels(path: impl AsRef<Path>, corpus: &mut Corpus) -> Result<()> {
    let path = path.as_ref();
    let mut labels = Vec::with_capacity(corpus.num_docs());
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        labels.push(
            t.parse::<u32>()
                .map_err(|_| Error::parse(path, i + 1, format!("malformed label {t:?}")))?,
        );
    }
    if labels.len() != corpus.num_docs() {
        return Err(Error::parse(
            path,
            labels.len(),
            format!("{} labels for {} documents", labels.len(), corpus.num_docs()),
        ));
    }
    for (doc, label) in corpus.docs.iter_mut().zip(labels) {
        doc.label = Some(label);
    }
    Ok(())
}

pub fn write_uci_bow(corpus: &Corpus, docword_path: impl AsRef<Path>, vocab_path: impl AsRef<Path>) -> Result<()> {
    let docword_path = docword_path.as_ref();
    let vocab_path = vocab_path.as_ref();
    let counts: Vec<Vec<(u32, u32)>> = corpus.docs.iter().map(Document::word_counts).collect();
    let nnz: usize = counts.iter().map(Vec::len).sum();

    let io = |e| Error::io(docword_path, e);
    let mut out = BufWriter::new(File::create(docword_path).map_err(io)?);
    writeln!(out, "{}\n{}\n{}", corpus.num_docs(), corpus.num_words(), nnz).map_err(io)?;
    for (d, row) in counts.iter().enumerate() {
        for &(w, c) in row {
            writeln!(out, "{} {} {}", d + 1, w + 1, c).map_err(io)?;
        }
    }
    out.flush().map_err(io)?;

    let io = |e| Error::io(vocab_path, e);
    let mut out = BufWriter::new(File::create(vocab_path).map_err(io)?);
    for w in &corpus.vocab {
        writeln!(out, "{w}").map_err(io)?;
    }
    out.flush().map_err(io)
}

/// Unlabeled documents are written as 0.
pub fn write_labels(corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io = |e| Error::io(path, e);
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    for doc in &corpus.docs {
        writeln!(out, "{}", doc.label.unwrap_or(0)).map_err(io)?;
    }
    out.flush().map_err(io)
}
