//! Teacher-forced episode replay: evaluates the training objective as a
//! deterministic scalar function of the parameters, with every sampled
//! quantity (fixations, actions, advantages) frozen from a recorded trace.
//!
//! This is the function whose analytic gradient the per-episode backward
//! pass accumulates, expressed independently as a pure forward computation.
//! Numeric probes (central finite differences) of these losses validate the
//! whole unrolled backward pass, including the stop-gradient structure: the
//! policy loss never touches the baseline head, and the baseline loss is
//! probed only on baseline parameters (its input is detached in training).

use crate::diffcore::gaussian_logprob;
use crate::env::ActionProtocol;
use crate::error::{Error, Result};
use crate::glimpse::{build_glimpse, GlimpseLocation};
use crate::image::Image;

use super::{EpisodeTrace, RamModel};

/// Everything needed to replay one episode's forward pass.
#[derive(Debug, Clone)]
pub struct EpisodeReplay {
    /// Observation `x_t` for each step.
    pub frames: Vec<Image>,
    /// The episode's random initial fixation.
    pub initial_loc: GlimpseLocation,
    /// Raw location samples drawn at each step (constants under replay).
    pub loc_raws: Vec<[f64; 2]>,
    /// Discrete actions taken, where the protocol sampled them.
    pub actions: Vec<Option<usize>>,
    /// Frozen advantages `R_t - b_t`.
    pub advantages: Vec<f64>,
    /// Frozen returns `R_t` (targets for the baseline loss).
    pub returns: Vec<f64>,
    /// Class label for the supervised term, on classification episodes.
    pub label: Option<usize>,
    pub protocol: ActionProtocol,
    /// Batch size `M` whose reciprocal scales every term.
    pub batch_size: usize,
}

impl EpisodeReplay {
    /// Builds a replay from a recorded trace and the per-step observations.
    /// For a static classification episode pass the single image `T` times.
    pub fn from_trace(trace: &EpisodeTrace, frames: Vec<Image>, label: Option<usize>, batch_size: usize) -> Result<Self> {
        if frames.len() != trace.steps.len() {
            return Err(Error::Dimension {
                op: "episode replay",
                expected: format!("{} frames", trace.steps.len()),
                got: format!("{}", frames.len()),
            });
        }
        Ok(EpisodeReplay {
            frames,
            initial_loc: trace.initial_loc,
            loc_raws: trace.steps.iter().map(|s| s.loc_sample_raw).collect(),
            actions: trace.steps.iter().map(|s| s.action).collect(),
            advantages: trace
                .returns
                .iter()
                .zip(&trace.steps)
                .map(|(r, s)| r - s.baseline)
                .collect(),
            returns: trace.returns.clone(),
            label,
            protocol: trace.protocol,
            batch_size,
        })
    }
}

/// Hidden states from replaying the forward pass without caching.
fn replay_hidden_states(model: &mut RamModel, replay: &EpisodeReplay) -> Result<Vec<Vec<f64>>> {
    let steps = replay.frames.len();
    let mut sense = replay.initial_loc;
    let mut state = model.initial_state();
    let mut hiddens = Vec::with_capacity(steps);
    for (frame, raw) in replay.frames.iter().zip(&replay.loc_raws) {
        let rho = build_glimpse(frame, sense, &model.cfg.retina);
        let g = model.glimpse_forward(&rho, sense.as_array(), false)?;
        state = model.core_step(&g, &state, false)?;
        hiddens.push(state.hidden.clone());
        sense = GlimpseLocation::new(raw[0], raw[1]);
    }
    Ok(hiddens)
}

impl RamModel {
    /// The policy objective as a loss (negated): score-function surrogate
    /// terms weighted by frozen advantages and the policy-head signal scale,
    /// plus the supervised cross-entropy at the final step on classification
    /// episodes. The baseline head contributes nothing here.
    pub fn replay_policy_loss(&mut self, replay: &EpisodeReplay, policy_scale: f64) -> Result<f64> {
        let steps = replay.frames.len();
        let sigma = self.cfg.location_sigma;
        let inv_m = 1.0 / replay.batch_size.max(1) as f64;
        let hiddens = replay_hidden_states(self, replay)?;
        let mut loss = 0.0;
        for t in 0..steps {
            let hidden = &hiddens[t];
            let last = t + 1 == steps;
            if !last {
                let mean = self.location_mean(hidden, false)?;
                let (logp, _) = gaussian_logprob(replay.loc_raws[t], mean, sigma)?;
                loss -= policy_scale * replay.advantages[t] * logp * inv_m;
            }
            match replay.protocol {
                ActionProtocol::SampleEachStep => {
                    let probs = self.action_distribution(hidden, false)?;
                    let action = replay.actions[t]
                        .ok_or_else(|| Error::State("replay lacks a sampled action".into()))?;
                    loss -= replay.advantages[t] * probs[action].max(1e-12).ln() * inv_m;
                }
                ActionProtocol::FinalArgmax if last => {
                    if let Some(label) = replay.label {
                        let probs = self.action_distribution(hidden, false)?;
                        loss -= probs[label].max(1e-12).ln() * inv_m;
                    }
                }
                ActionProtocol::FinalArgmax => {}
            }
        }
        Ok(loss)
    }

    /// The baseline regression loss `scale * sum_t (b_t - R_t)^2 / M`.
    /// Meaningful for probing baseline-head parameters only: in training the
    /// baseline input is detached, so this loss sends no gradient upstream.
    pub fn replay_baseline_loss(&mut self, replay: &EpisodeReplay, scale: f64) -> Result<f64> {
        let inv_m = 1.0 / replay.batch_size.max(1) as f64;
        let hiddens = replay_hidden_states(self, replay)?;
        let mut loss = 0.0;
        for (hidden, ret) in hiddens.iter().zip(&replay.returns) {
            let b = self.baseline_predict(hidden, false)?;
            loss += scale * (b - ret) * (b - ret) * inv_m;
        }
        Ok(loss)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{ClassificationEnv, Environment};
    use crate::glimpse::RetinaConfig;
    use crate::learning::{episode_signals, SignalConfig};
    use crate::model::{rollout_episode, CoreKind, RamConfig, RolloutMode};
    use crate::rng::substream;

    #[test]
    fn replay_loss_is_deterministic_and_finite() {
        let cfg = RamConfig {
            retina: RetinaConfig {
                patch_width: 2,
                num_scales: 2,
            },
            glimpse_feature_dim: 3,
            glimpse_output_dim: 4,
            core_dim: 5,
            core_kind: CoreKind::RectifierRnn,
            num_glimpses: 3,
            location_sigma: 0.3,
            num_actions: 10,
            discount: 1.0,
        };
        let mut model = RamModel::new(cfg, &mut substream(100, "replay", 0)).unwrap();
        let image = Image::from_vec(8, 8, (0..64).map(|i| (i % 7) as f64 / 7.0).collect());
        let mut env = ClassificationEnv::new(image.clone(), 4, 10, 3);
        let mut rng = substream(100, "replay-policy", 0);
        let trace = rollout_episode(&mut model, &mut env, &mut rng, RolloutMode::Train, 0).unwrap();
        let replay =
            EpisodeReplay::from_trace(&trace, vec![image; 3], Some(4), 1).unwrap();
        // The cached rollout is still pending a backward; replay must not
        // disturb it.
        let a = model.replay_policy_loss(&replay, 1.0).unwrap();
        let b = model.replay_policy_loss(&replay, 1.0).unwrap();
        assert_eq!(a, b);
        assert!(a.is_finite());
        let bl = model.replay_baseline_loss(&replay, 1.0).unwrap();
        assert!(bl.is_finite() && bl >= 0.0);
        // Backward still consumes the rollout's caches cleanly.
        let scfg = SignalConfig {
            batch_size: 1,
            reinforce: true,
            hybrid: true,
            baseline_scale: 1.0,
            loc_path_scale: 1.0,
            policy_scale: 1.0,
        };
        let signals = episode_signals(&trace, Some(4), 0.3, &scfg).unwrap();
        model.backward_episode(&signals).unwrap();
        let _ = env.terminal();
    }
}
