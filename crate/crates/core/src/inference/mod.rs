//! Stochastic variational inference: per-document local steps and global
//! blending steps.

mod elbo;
mod global;
mod local;
mod sampler;
mod train;

pub use elbo::{estimate_local_elbo, local_elbo_with_noise, LocalElbo};
pub use global::{global_step, MinibatchStats};
pub use local::{draw_noise, grad_xi, grad_xi_with_noise, local_step, update_gamma, LocalStepReport};
pub use sampler::{sample_topic, TopicSampler};
pub use train::{train, train_from, MinibatchReport, TraceRow, TrainOutput, Trainer};

/// `ι = (1 + iter)^{-0.9}`
pub fn lr_schedule(iter: u64) -> f64 {
    (1.0 + iter as f64).powf(-0.9)
}
