//! Episodic environments behind one interface.
//!
//! Two very different tasks, static image classification and the dynamic
//! Catch game, are driven by the same rollout loop. The environment decides
//! how actions are selected (a single argmax classification at the final
//! step, or a sampled game action every step).

mod catch;
mod classify;

pub use catch::{greedy_tracker_action, CatchEnv, CatchState, CATCH_ACTIONS, SCREEN};
pub use classify::ClassificationEnv;

use crate::error::Result;
use crate::image::Image;

/// Result of one environment transition.
#[derive(Debug, Clone)]
pub struct EnvStepResult {
    /// The next observation `x_{t+1}`.
    pub observation: Image,
    /// Scalar reward for the transition.
    pub reward: f64,
    /// Whether the episode is over. Stepping a terminal environment is a
    /// protocol error until it is reset.
    pub terminal: bool,
}

/// How the agent's action head is used on this environment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActionProtocol {
    /// Deterministic argmax classification emitted only at the final step.
    FinalArgmax,
    /// An action sampled from the softmax at every step.
    SampleEachStep,
}

pub trait Environment {
    /// Current observation `x_t` (the pre-action frame).
    fn observation(&self) -> Image;
    /// Applies an action. Classification ignores the action until the final
    /// step; Catch requires one every step.
    fn step(&mut self, action: Option<usize>) -> Result<EnvStepResult>;
    fn terminal(&self) -> bool;
    /// Size of the discrete action set (10 classes, or 3 game moves).
    fn action_count(&self) -> usize;
    fn protocol(&self) -> ActionProtocol;
}
