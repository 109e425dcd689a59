use std::time::Instant;

use rand::seq::SliceRandom;

use super::global::{global_step, MinibatchStats};
use super::local::{local_step, LocalStepReport};
use super::lr_schedule;
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::evaluation::heldout_perword_ll_with;
use crate::model::{init_params, GlobalState, ModelConfig};
use crate::numerics::RandomStream;
use crate::parallel::Executor;

const INIT_STREAM: u64 = 0x494e_4954;
const SHUFFLE_STREAM: u64 = 0x5348_5546;
const LOCAL_STREAM: u64 = 0x4c4f_4341;

/// One held-out evaluation during training.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    /// Global steps taken when the evaluation ran.
    pub iteration: u64,
    /// Learning rate of the last global step.
    pub rate: f64,
    pub heldout_ll: f64,
    /// Wall time since training started.
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub state: GlobalState,
    pub trace: Vec<TraceRow>,
    /// Whether the held-out criterion was met before the epoch limit.
    pub converged: bool,
}

/// Outcome of one minibatch.
#[derive(Debug, Clone, PartialEq)]
pub struct MinibatchReport {
    pub rate: f64,
    pub num_docs: usize,
    pub num_tokens: usize,
    pub mean_inner_iterations: f64,
    pub mean_elbo: f64,
}

/// Stochastic variational training over a fixed corpus.
pub struct Trainer<'a> {
    corpus: &'a Corpus,
    config: &'a ModelConfig,
    executor: &'a Executor,
    pub state: GlobalState,
    active: Vec<usize>,
}

impl<'a> Trainer<'a> {
    /// Starts from [`init_params`] seeded by the config.
    pub fn new(corpus: &'a Corpus, config: &'a ModelConfig, executor: &'a Executor) -> Result<Self> {
        config.checked(corpus.num_words())?;
        let mut rng = RandomStream::derive(config.seed, &[INIT_STREAM]);
        let state = init_params(config, corpus.num_words(), &mut rng)?;
        Self::from_state(corpus, config, executor, state)
    }

    pub fn from_state(
        corpus: &'a Corpus,
        config: &'a ModelConfig,
        executor: &'a Executor,
        state: GlobalState,
    ) -> Result<Self> {
        config.checked(corpus.num_words())?;
        if state.num_topics() != config.num_topics || state.num_words() != corpus.num_words() {
            return Err(Error::Shape(format!(
                "state has K={}, V={} but training expects K={}, V={}",
                state.num_topics(),
                state.num_words(),
                config.num_topics,
                corpus.num_words()
            )));
        }
        let active: Vec<usize> = (0..corpus.num_docs()).filter(|&d| !corpus.docs[d].is_empty()).collect();
        if active.is_empty() {
            return Err(Error::Empty("training corpus has no non-empty documents".into()));
        }
        Ok(Self {
            corpus,
            config,
            executor,
            state,
            active,
        })
    }

    /// Indices of the documents used for training (the non-empty ones).
    pub fn active_docs(&self) -> &[usize] {
        &self.active
    }

    /// A uniformly shuffled partition of the active documents into minibatches.
    pub fn minibatches(&self, epoch: u64) -> Vec<Vec<usize>> {
        let mut order = self.active.clone();
        let mut rng = RandomStream::derive(self.config.seed, &[SHUFFLE_STREAM, epoch]);
        order.shuffle(&mut rng);
        order.chunks(self.config.batch_size).map(<[usize]>::to_vec).collect()
    }

    /// Local steps for `batch` against the current state.
    pub fn local_pass(&self, batch: &[usize]) -> Result<(MinibatchStats, Vec<LocalStepReport>)> {
        let iteration = self.state.iteration;
        let results = self.executor.map(batch.len(), |i| {
            let d = batch[i];
            let mut rng = RandomStream::derive(self.config.seed, &[LOCAL_STREAM, iteration, d as u64]);
            local_step(&self.corpus.docs[d], &self.state, self.config, &mut rng)
        });
        let mut stats = MinibatchStats::new(self.state.num_topics(), self.state.embed_dim());
        let mut reports = Vec::with_capacity(batch.len());
        for (&d, result) in batch.iter().zip(results) {
            let (ds, report) = result?;
            stats.add(&self.corpus.docs[d], &ds);
            reports.push(report);
        }
        Ok((stats, reports))
    }

    /// One full SVI iteration on `batch`.
    pub fn step(&mut self, batch: &[usize]) -> Result<MinibatchReport> {
        let (stats, reports) = self.local_pass(batch)?;
        let rate = lr_schedule(self.state.iteration);
        global_step(&stats, &mut self.state, rate, self.active.len(), self.config)?;
        let n = reports.len().max(1) as f64;
        Ok(MinibatchReport {
            rate,
            num_docs: stats.num_docs,
            num_tokens: stats.num_tokens(),
            mean_inner_iterations: reports.iter().map(|r| r.iterations as f64).sum::<f64>() / n,
            mean_elbo: reports.iter().map(|r| r.elbo).sum::<f64>() / n,
        })
    }
}

/// Trains until consecutive held-out per-word log-likelihoods differ by less
/// than the outer tolerance, or the epoch limit. Without a held-out corpus
/// every epoch runs and the trace stays empty.
pub fn train(
    corpus: &Corpus,
    heldout: Option<&Corpus>,
    config: &ModelConfig,
    executor: &Executor,
) -> Result<TrainOutput> {
    let trainer = Trainer::new(corpus, config, executor)?;
    train_from(trainer, heldout)
}

/// [`train`] continuing from an existing trainer.
pub fn train_from(mut trainer: Trainer<'_>, heldout: Option<&Corpus>) -> Result<TrainOutput> {
    let config = trainer.config;
    let started = Instant::now();
    let mut trace = Vec::new();
    let mut previous: Option<f64> = None;
    let mut converged = false;
    'epochs: for epoch in 0..config.max_epochs as u64 {
        let batches = trainer.minibatches(epoch);
        let interval = batches.len().div_ceil(config.evals_per_epoch).max(1);
        for (b, batch) in batches.iter().enumerate() {
            let report = trainer.step(batch)?;
            let last = b + 1 == batches.len();
            let Some(test) = heldout else { continue };
            if (b + 1) % interval != 0 && !last {
                continue;
            }
            let ll = heldout_perword_ll_with(&trainer.state, test, config, trainer.executor)?;
            trace.push(TraceRow {
                iteration: trainer.state.iteration,
                rate: report.rate,
                heldout_ll: ll,
                seconds: started.elapsed().as_secs_f64(),
            });
            if let Some(prev) = previous {
                if (ll - prev).abs() < config.outer_tol {
                    converged = true;
                    break 'epochs;
                }
            }
            previous = Some(ll);
        }
    }
    Ok(TrainOutput {
        state: trainer.state,
        trace,
        converged,
    })
}
