//! Recurrent visual attention model.
//!
//! A bandwidth-limited sensor extracts a multi-resolution glimpse around a
//! fixation point; a recurrent core integrates glimpses over time; a
//! location head parameterizes a Gaussian policy over the next fixation; an
//! action head classifies (or plays); a baseline head predicts returns. The
//! whole model is trained end-to-end with REINFORCE plus a learned baseline,
//! combined with a supervised cross-entropy term on classification tasks.

pub mod baselines;
pub mod cli;
pub mod config;
pub mod datasets;
pub mod diffcore;
pub mod error;
pub mod eval;
pub mod glimpse;
pub mod gradcheck;
pub mod image;
pub mod learning;
pub mod env;
pub mod model;
pub mod rng;
pub mod viz;

pub use error::{Error, Result};
pub use image::Image;
