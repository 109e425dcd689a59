//! Small dense symmetric linear algebra, special functions, and seeded
//! random streams.

mod linalg;
mod random;
mod special;

pub use linalg::{sym_inverse, Cholesky, SymMatrix};
pub use random::{gaussian_vector, stream_id, RandomStream, Scale};
pub use special::{digamma, log_sum_exp, softmax};

pub(crate) use special::{psi, softmax_in_place};
