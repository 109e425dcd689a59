//! Top-K topic selection, the truncated topic-word store, and residual
//! sampling over topics outside a token's sparse support.

mod residual;
mod topk;
mod truncated;

pub use residual::{residual_draw, ResidualSampler, TopicMask};
pub use topk::{topk_select, TopKView};
pub use truncated::{rebuild_truncation, TruncatedTopicWords, WordTopicEntry};

pub(crate) use truncated::finish as from_sorted_rows;
