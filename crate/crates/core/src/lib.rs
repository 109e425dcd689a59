//! Correlated topic modeling with low-dimensional topic and document
//! embeddings, trained by stochastic variational inference with sparse
//! topic sampling.
//!
//! Each document draws an embedding `a_d`; its topic weights are Gaussian
//! around `U a_d`, where the rows of `U` are topic embeddings, so topic
//! correlations are the low-rank `UUᵀ`. Sampling a token's topic touches only
//! the document's top topics and the topics that retain the word, keeping a
//! training iteration linear in the number of topics.

pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod export;
pub mod inference;
pub mod lda;
pub mod model;
pub mod numerics;
pub mod parallel;
pub mod sparsity;

pub use error::{Error, Result};
