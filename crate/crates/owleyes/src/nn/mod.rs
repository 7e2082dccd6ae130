//! Layer primitives with exact forward semantics and hand-derived gradients.
//!
//! Every backward pass here is verified against the central-difference oracle
//! in [`gradcheck`]; see the per-module tests and the acceptance suite.

pub mod batchnorm;
pub mod conv;
pub mod fc;
pub mod gradcheck;
pub mod pool;
pub mod relu;
pub mod sgd;
pub mod softmax;

pub use batchnorm::{batchnorm, batchnorm_backward, BNCache, BNGrads, BNMode, BNOutput, BNParams};
pub use conv::{conv2d, conv2d_backward, ConvGrads, ConvParams};
pub use fc::{fully_connected, fully_connected_backward, FCGrads, FCParams};
pub use gradcheck::{finite_difference_oracle, max_relative_error, relative_error};
pub use pool::{maxpool2x2, maxpool2x2_backward, PoolContext};
pub use relu::{relu, relu_backward};
pub use sgd::sgd_step;
pub use softmax::{softmax_cross_entropy, SoftmaxLoss};
