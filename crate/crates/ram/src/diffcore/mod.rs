//! Minimal differentiable computation core.
//!
//! Exactly the pieces the attention model needs: dense affine layers, the
//! rectifier, softmax/cross-entropy, an LSTM cell, a Gaussian log-density,
//! and SGD with momentum. There is no general computation graph; each layer
//! caches what its own backward pass needs, and backward calls mirror
//! forward calls in reverse order.

pub mod activations;
pub mod checkpoint;
pub mod linear;
pub mod lstm;
pub mod optimizer;
pub mod tensor;

pub use activations::{cross_entropy, gaussian_logprob, rect, softmax, Rect};
pub use linear::{Init, Linear};
pub use lstm::{LstmCell, LstmState};
pub use optimizer::SgdMomentum;
pub use tensor::{ParamBlock, Parameterized, Tensor2D};
