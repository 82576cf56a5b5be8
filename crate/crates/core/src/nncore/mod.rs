//! Minimal deterministic neural-network core.
//!
//! 64-bit dense matrices, fully connected layers with ReLU/softmax, a
//! hand-written backward pass for feed-forward stacks and RMSProp with
//! gradient-side L2 weight decay. Everything here is single-threaded and
//! bit-reproducible for a fixed seed and input.

mod layer;
mod loss;
mod matrix;
mod mlp;
mod optim;

pub use layer::{
    apply_activation, dense_forward, init_params, softmax, softmax_in_place, Activation, DenseLayer,
};
pub use loss::{nll_loss, softmax_nll_grad, PROB_FLOOR};
pub use matrix::{axpy, dot, Matrix};
pub(crate) use mlp::layer_seed;
pub use mlp::{flatten_gradients, Gradients, LayerGrad, Mlp, Trace};
pub use optim::{rmsprop_step, rmsprop_update, RmsPropConfig, RmsPropState};
