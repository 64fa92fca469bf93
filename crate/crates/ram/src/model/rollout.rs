//! Episode rollouts: sense, integrate, act, and record.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::diffcore::gaussian_logprob;
use crate::env::{ActionProtocol, Environment};
use crate::error::{Error, Result};
use crate::glimpse::{build_glimpse, GlimpseLocation};
use crate::rng::standard_normal;

use super::RamModel;

/// How a rollout samples and whether it records for a backward pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RolloutMode {
    /// Caching forward (a backward pass may follow), stochastic locations.
    Train,
    /// No caching; the location policy follows its mean. Classification
    /// evaluation.
    EvalDeterministic,
    /// No caching; the stochastic policy is kept. Catch evaluation.
    EvalStochastic,
}

impl RolloutMode {
    fn caches(self) -> bool {
        matches!(self, RolloutMode::Train)
    }

    fn stochastic(self) -> bool {
        !matches!(self, RolloutMode::EvalDeterministic)
    }
}

/// Everything recorded at one step of an episode.
#[derive(Debug, Clone)]
pub struct StepRecord {
    /// 1-based step index.
    pub t: usize,
    /// The fixation the sensor used this step (`l_{t-1}`).
    pub sensed_loc: GlimpseLocation,
    /// Mean of the location policy computed from `h_t`.
    pub loc_mean: [f64; 2],
    /// Raw (unclamped) location sample drawn this step (`l_t`). The density
    /// is evaluated here; the clamp is part of the sensor interface.
    pub loc_sample_raw: [f64; 2],
    /// Clamped sample fed to the sensor at the next step.
    pub loc_sample: GlimpseLocation,
    /// `log pi(l_t | h_t)` at the raw sample.
    pub loc_logprob: f64,
    /// Baseline prediction `b_t`.
    pub baseline: f64,
    /// Recurrent state after this step.
    pub hidden: Vec<f64>,
    /// Discrete action emitted this step, if the protocol called for one.
    pub action: Option<usize>,
    /// Softmax distribution the action was taken from.
    pub action_probs: Option<Vec<f64>>,
    /// `log pi(a_t | h_t)` of the emitted action.
    pub action_logprob: Option<f64>,
    /// Reward received after acting.
    pub reward: f64,
}

/// A complete recorded episode.
#[derive(Debug, Clone)]
pub struct EpisodeTrace {
    pub episode_id: u64,
    /// The random fixation that seeded the episode (`l_0`).
    pub initial_loc: GlimpseLocation,
    pub steps: Vec<StepRecord>,
    /// Discounted suffix returns `R_t`, one per step.
    pub returns: Vec<f64>,
    pub total_reward: f64,
    /// Final-step argmax class on classification environments.
    pub prediction: Option<usize>,
    /// The action protocol the episode was rolled out under.
    pub protocol: ActionProtocol,
}

impl EpisodeTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

fn sample_categorical<R: Rng>(rng: &mut R, probs: &[f64]) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Runs one episode against `env`.
///
/// The first fixation is uniform over `[-1, 1]^2`. At each step the sensor
/// reads the pre-action frame at the previous fixation, the core integrates
/// it, the action head acts per the environment's protocol, and the location
/// head draws the next fixation. The final location sample is drawn and
/// recorded like the rest but never feeds the sensor.
///
/// Per-step rng draws, in order: the game action (sampling protocols only),
/// then two normals for the location noise (stochastic modes only).
pub fn rollout_episode(
    model: &mut RamModel,
    env: &mut dyn Environment,
    rng: &mut ChaCha8Rng,
    mode: RolloutMode,
    episode_id: u64,
) -> Result<EpisodeTrace> {
    let episode_len = model.cfg.num_glimpses;
    let sigma = model.cfg.location_sigma;
    let train = mode.caches();

    let initial_loc = GlimpseLocation::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
    let mut sense_loc = initial_loc;
    let mut state = model.initial_state();
    let mut obs = env.observation();
    let mut steps: Vec<StepRecord> = Vec::with_capacity(episode_len);
    let mut prediction = None;

    for t in 1..=episode_len {
        if env.terminal() {
            return Err(Error::Protocol(format!(
                "environment exhausted at step {t} of {episode_len}"
            )));
        }
        let rho = build_glimpse(&obs, sense_loc, &model.cfg.retina);
        let g = model.glimpse_forward(&rho, sense_loc.as_array(), train)?;
        state = model.core_step(&g, &state, train)?;
        let baseline = model.baseline_predict(&state.hidden, train)?;

        let (action, action_probs, action_logprob) = match env.protocol() {
            ActionProtocol::FinalArgmax if t == episode_len => {
                let probs = model.action_distribution(&state.hidden, train)?;
                let a = argmax(&probs);
                prediction = Some(a);
                let logp = probs[a].max(1e-12).ln();
                (Some(a), Some(probs), Some(logp))
            }
            ActionProtocol::FinalArgmax => (None, None, None),
            ActionProtocol::SampleEachStep => {
                let probs = model.action_distribution(&state.hidden, train)?;
                let a = sample_categorical(rng, &probs);
                let logp = probs[a].max(1e-12).ln();
                (Some(a), Some(probs), Some(logp))
            }
        };

        let step_result = env.step(action)?;

        let loc_mean = model.location_mean(&state.hidden, train)?;
        let loc_sample_raw = if mode.stochastic() {
            [
                loc_mean[0] + sigma * standard_normal(rng),
                loc_mean[1] + sigma * standard_normal(rng),
            ]
        } else {
            loc_mean
        };
        let (loc_logprob, _) = gaussian_logprob(loc_sample_raw, loc_mean, sigma)?;
        let loc_sample = GlimpseLocation::new(loc_sample_raw[0], loc_sample_raw[1]);

        steps.push(StepRecord {
            t,
            sensed_loc: sense_loc,
            loc_mean,
            loc_sample_raw,
            loc_sample,
            loc_logprob,
            baseline,
            hidden: state.hidden.clone(),
            action,
            action_probs,
            action_logprob,
            reward: step_result.reward,
        });

        sense_loc = loc_sample;
        obs = step_result.observation;
    }

    let returns = discounted_returns(&steps, model.cfg.discount);
    let total_reward = steps.iter().map(|s| s.reward).sum();
    Ok(EpisodeTrace {
        episode_id,
        initial_loc,
        steps,
        returns,
        total_reward,
        prediction,
        protocol: env.protocol(),
    })
}

/// Suffix returns `R_t = sum_{t' >= t} discount^(t'-t) r_{t'}`.
fn discounted_returns(steps: &[StepRecord], discount: f64) -> Vec<f64> {
    let mut returns = vec![0.0; steps.len()];
    let mut acc = 0.0;
    for (i, step) in steps.iter().enumerate().rev() {
        acc = step.reward + discount * acc;
        returns[i] = acc;
    }
    returns
}
