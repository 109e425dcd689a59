//! Line-oriented model container.
//!
//! ```text
//! topic-embedding-model 1
//! kind embedding|lda
//! num_words <V>
//! iteration <n>
//! config <key> <value>        one line per ModelConfig entry
//! mu <K> <M>                  embedding only; K lines of M floats
//! sigma_u <M>                 embedding only; M lines of M floats
//! sigma_a <M>                 embedding only; M lines of M floats
//! lambda <K>                  K lines: <count> <word>:<value> ...
//! end
//! ```
//!
//! Floats are written in shortest round-trip exponent form, so a load
//! reproduces the saved bits exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{GlobalState, ModelConfig};
use crate::error::{Error, Result};
use crate::numerics::SymMatrix;
use crate::sparsity::from_sorted_rows;

const MAGIC: &str = "topic-embedding-model";
const VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Embedding,
    Lda,
}

impl ModelKind {
    fn tag(self) -> &'static str {
        match self {
            ModelKind::Embedding => "embedding",
            ModelKind::Lda => "lda",
        }
    }
}

/// Everything a model file holds; the embedding parts are absent for LDA.
#[derive(Debug, Clone)]
pub(crate) struct Container {
    pub kind: ModelKind,
    pub config: ModelConfig,
    pub num_words: usize,
    pub iteration: u64,
    pub embedding: Option<(Vec<f64>, SymMatrix, SymMatrix)>,
    pub lambda: Vec<Vec<(u32, f64)>>,
}

pub(crate) fn write_container(c: &Container, path: &Path) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC} {VERSION}");
    let _ = writeln!(out, "kind {}", c.kind.tag());
    let _ = writeln!(out, "num_words {}", c.num_words);
    let _ = writeln!(out, "iteration {}", c.iteration);
    for (key, value) in c.config.entries() {
        let _ = writeln!(out, "config {key} {value}");
    }
    let k = c.lambda.len();
    if let Some((mu, sigma_u, sigma_a)) = &c.embedding {
        let m = sigma_u.dim();
        let _ = writeln!(out, "mu {k} {m}");
        for row in 0..k {
            write_floats(&mut out, &mu[row * m..(row + 1) * m]);
        }
        for (name, mat) in [("sigma_u", sigma_u), ("sigma_a", sigma_a)] {
            let _ = writeln!(out, "{name} {m}");
            for i in 0..m {
                write_floats(&mut out, mat.row(i));
            }
        }
    }
    let _ = writeln!(out, "lambda {k}");
    for row in &c.lambda {
        let _ = write!(out, "{}", row.len());
        for &(w, v) in row {
            let _ = write!(out, " {w}:{v:e}");
        }
        out.push('\n');
    }
    out.push_str("end\n");
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

fn write_floats(out: &mut String, values: &[f64]) {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{v:e}");
    }
    out.push('\n');
}

struct Lines<'a> {
    iter: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self, what: &str) -> Result<&'a str> {
        match self.iter.next() {
            Some((i, l)) => {
                self.line = i + 1;
                Ok(l)
            }
            None => Err(Error::ModelFormat(format!("truncated file: missing {what}"))),
        }
    }

    fn err(&self, msg: impl std::fmt::Display) -> Error {
        Error::ModelFormat(format!("line {}: {msg}", self.line))
    }

    fn keyed(&mut self, key: &str) -> Result<Vec<&'a str>> {
        let line = self.next(key)?;
        let mut fields = line.split_whitespace();
        if fields.next() != Some(key) {
            return Err(self.err(format!("expected {key:?}, found {line:?}")));
        }
        Ok(fields.collect())
    }

    fn number<T: std::str::FromStr>(&self, s: Option<&&str>, what: &str) -> Result<T> {
        s.and_then(|s| s.parse().ok())
            .ok_or_else(|| self.err(format!("malformed {what}")))
    }

    fn floats(&mut self, n: usize, what: &str) -> Result<Vec<f64>> {
        let line = self.next(what)?;
        let values: Vec<f64> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| self.err(format!("malformed {what}")))?;
        if values.len() != n {
            return Err(self.err(format!("{what}: expected {n} values, found {}", values.len())));
        }
        Ok(values)
    }

    fn matrix(&mut self, m: usize, what: &str) -> Result<SymMatrix> {
        let mut data = Vec::with_capacity(m * m);
        for _ in 0..m {
            data.extend(self.floats(m, what)?);
        }
        Ok(SymMatrix::from_raw(m, data))
    }
}

pub(crate) fn read_container(path: &Path) -> Result<Container> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = Lines {
        iter: text.lines().enumerate(),
        line: 0,
    };

    let version = lines
        .keyed(MAGIC)
        .map_err(|_| Error::ModelFormat("not a model file".into()))?;
    let version: u32 = lines.number(version.first(), "version")?;
    if version != VERSION {
        return Err(Error::ModelFormat(format!(
            "unsupported format version {version} (expected {VERSION})"
        )));
    }
    let kind = match lines.keyed("kind")?.first().copied() {
        Some("embedding") => ModelKind::Embedding,
        Some("lda") => ModelKind::Lda,
        other => return Err(lines.err(format!("unknown model kind {other:?}"))),
    };
    let num_words: usize = {
        let f = lines.keyed("num_words")?;
        lines.number(f.first(), "num_words")?
    };
    let iteration: u64 = {
        let f = lines.keyed("iteration")?;
        lines.number(f.first(), "iteration")?
    };

    let mut config = ModelConfig::new(1);
    let expected = config.entries().len();
    for _ in 0..expected {
        let f = lines.keyed("config")?;
        if f.len() != 2 {
            return Err(lines.err("malformed config entry"));
        }
        config.set(f[0], f[1]).map_err(|e| lines.err(e))?;
    }

    let embedding = if kind == ModelKind::Embedding {
        let f = lines.keyed("mu")?;
        let k: usize = lines.number(f.first(), "topic count")?;
        let m: usize = lines.number(f.get(1), "embedding dimension")?;
        let mut mu = Vec::with_capacity(k * m);
        for _ in 0..k {
            mu.extend(lines.floats(m, "mu row")?);
        }
        let mut mats = Vec::with_capacity(2);
        for name in ["sigma_u", "sigma_a"] {
            let f = lines.keyed(name)?;
            let dim: usize = lines.number(f.first(), "dimension")?;
            if dim != m {
                return Err(lines.err(format!("{name} is {dim}x{dim}, expected {m}x{m}")));
            }
            mats.push(lines.matrix(m, name)?);
        }
        let sigma_a = mats.pop().unwrap();
        let sigma_u = mats.pop().unwrap();
        Some((mu, sigma_u, sigma_a))
    } else {
        None
    };

    let f = lines.keyed("lambda")?;
    let k: usize = lines.number(f.first(), "topic count")?;
    let mut lambda = Vec::with_capacity(k);
    for _ in 0..k {
        let line = lines.next("lambda row")?;
        let mut fields = line.split_whitespace();
        let count: usize = lines.number(fields.next().as_ref(), "entry count")?;
        let mut row = Vec::with_capacity(count);
        for field in fields {
            let (w, v) = field
                .split_once(':')
                .ok_or_else(|| lines.err("malformed lambda entry"))?;
            let w: u32 = w.parse().map_err(|_| lines.err("malformed word id"))?;
            let v: f64 = v.parse().map_err(|_| lines.err("malformed lambda value"))?;
            if w as usize >= num_words {
                return Err(lines.err(format!("word id {w} out of range")));
            }
            if row.last().is_some_and(|&(prev, _)| prev >= w) {
                return Err(lines.err("lambda entries not sorted by word id"));
            }
            row.push((w, v));
        }
        if row.len() != count {
            return Err(lines.err(format!("expected {count} lambda entries, found {}", row.len())));
        }
        lambda.push(row);
    }
    if lines.next("end marker")? != "end" {
        return Err(lines.err("expected end marker"));
    }
    if let Some((mu, _, _)) = &embedding {
        if mu.len() != k * config.embed_dim {
            return Err(Error::ModelFormat("mu and lambda disagree on topic count".into()));
        }
    }
    if k != config.num_topics {
        return Err(Error::ModelFormat(format!(
            "file holds {k} topics but its config says {}",
            config.num_topics
        )));
    }
    Ok(Container {
        kind,
        config,
        num_words,
        iteration,
        embedding,
        lambda,
    })
}

pub fn save_model(state: &GlobalState, config: &ModelConfig, path: impl AsRef<Path>) -> Result<()> {
    let container = Container {
        kind: ModelKind::Embedding,
        config: config.clone(),
        num_words: state.num_words(),
        iteration: state.iteration,
        embedding: Some((
            state.topic_means().to_vec(),
            state.topic_cov.clone(),
            state.doc_cov.clone(),
        )),
        lambda: state.words.rows().to_vec(),
    };
    write_container(&container, path.as_ref())
}

/// Loads an embedding model together with the configuration it was trained with.
pub fn load_model(path: impl AsRef<Path>) -> Result<(GlobalState, ModelConfig)> {
    let c = read_container(path.as_ref())?;
    let Some((mu, sigma_u, sigma_a)) = c.embedding else {
        return Err(Error::ModelFormat(format!(
            "expected an embedding model, found kind {:?}",
            c.kind.tag()
        )));
    };
    let words = from_sorted_rows(c.lambda, c.config.beta, c.num_words);
    let state = GlobalState::from_flat(
        c.config.num_topics,
        c.config.embed_dim,
        mu,
        sigma_u,
        sigma_a,
        words,
        c.iteration,
    )?;
    Ok((state, c.config))
}

/// [`load_model`], failing unless `K` and `M` agree with `config`.
pub fn load_model_checked(path: impl AsRef<Path>, config: &ModelConfig) -> Result<GlobalState> {
    let (state, saved) = load_model(path)?;
    if saved.num_topics != config.num_topics || saved.embed_dim != config.embed_dim {
        return Err(Error::Shape(format!(
            "model has K={}, M={} but config expects K={}, M={}",
            saved.num_topics, saved.embed_dim, config.num_topics, config.embed_dim
        )));
    }
    Ok(state)
}
