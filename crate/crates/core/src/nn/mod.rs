//! Classical layers with hand-written forward and backward passes.
//!
//! Every layer operates on a single sample. Batching happens one level up,
//! where per-sample gradients are accumulated.

mod activation;
mod conv;
mod gemm;
mod init;
mod linear;
mod pool;

pub use activation::{dropout_backward, dropout_forward, relu_backward, relu_forward, DropoutMask};
pub use conv::{ConvCache, ConvGrads, ConvLayer};
pub use init::{xavier_bound, xavier_uniform_init};
pub use linear::{LinearGrads, LinearLayer};
pub use pool::{maxpool2x2_backward, maxpool2x2_forward, pooled_len, PoolCache};
