//! Training: REINFORCE with a learned baseline, the hybrid supervised loss,
//! and the epoch loop.
//!
//! The score-function estimator weights log-probability gradients of taken
//! actions by the baseline-subtracted return, averaged over a minibatch of M
//! episodes. The gradient-ascent sign is folded into the loss convention
//! (loss = -objective), so the same SGD step serves every head:
//!
//! - location head (and everything upstream): `-(R_t - b_t)/M * d log pi(l_t)`
//!   for every step whose sample later feeds the sensor
//! - game-action head, on sampled-action environments: the same weighting of
//!   `d log pi(a_t)`
//! - classification head: plain cross-entropy at the final step, `1/M`,
//!   backpropagated through core and glimpse networks
//! - baseline head: `d/db (b_t - R_t)^2 / M` with its input treated as a
//!   constant
//!
//! The final step's location sample never feeds the sensor, so its log-prob
//! carries no learning signal.

pub mod search;

use std::time::Instant;

use crate::datasets::{EpochStream, Task};
use crate::diffcore::{Parameterized, SgdMomentum};
use crate::env::{ActionProtocol, CatchEnv, ClassificationEnv};
use crate::error::{Error, Result};
use crate::eval::{self, ImageClassifier};
use crate::model::{rollout_episode, EpisodeSignals, EpisodeTrace, RamModel, RolloutMode};
use crate::rng::{mix_seed, substream};

/// Optimization hyperparameters for one training run.
#[derive(Debug, Clone, Copy)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    /// Episodes per gradient step (M).
    pub batch_size: usize,
    pub epochs: usize,
    /// Location policy standard deviation; forwarded into the model config.
    pub sigma: f64,
    /// Root seed; all data, policy, and environment streams derive from it.
    pub seed: u64,
    /// Training examples per epoch; 0 means one pass over the base digits.
    pub examples_per_epoch: usize,
    /// Validation items used for the per-epoch metric; 0 means the full
    /// held-out split.
    pub val_examples: usize,
    /// Worker threads for batch rollouts. Runs are reproducible for a fixed
    /// worker count.
    pub workers: usize,
    /// Scale on the baseline squared-error term relative to the policy
    /// losses; 0 selects `1/core_dim`. Keeps the value regression inside the
    /// optimizer's stability region as features grow.
    pub baseline_scale: f64,
    /// Global-norm gradient clip applied to the accumulated batch gradient
    /// before each optimizer step; 0 disables.
    pub grad_clip: f64,
    /// Multiplier on the location head's backward injection into the core;
    /// 1 is the full coupling, 0 detaches the location path from the
    /// representation.
    pub loc_path_scale: f64,
    /// Scale on the location-head REINFORCE signal; 0 selects
    /// `1/core_dim`. Plays the role per-parameter step normalization would
    /// under an adaptive optimizer.
    pub policy_scale: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.1,
            momentum: 0.9,
            batch_size: 20,
            epochs: 1,
            sigma: 0.2,
            seed: 1,
            examples_per_epoch: 0,
            val_examples: 0,
            workers: 1,
            baseline_scale: 0.0,
            grad_clip: 10.0,
            loc_path_scale: 1.0,
            policy_scale: 0.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.learning_rate <= 0.0 {
            return Err(Error::Config(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size < 1 {
            return Err(Error::Config("batch_size must be >= 1".into()));
        }
        if self.sigma <= 0.0 {
            return Err(Error::Config(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        if self.workers < 1 {
            return Err(Error::Config("workers must be >= 1".into()));
        }
        if self.baseline_scale < 0.0 {
            return Err(Error::Config("baseline_scale must be >= 0".into()));
        }
        if self.grad_clip < 0.0 {
            return Err(Error::Config("grad_clip must be >= 0".into()));
        }
        if !(0.0..=1.0).contains(&self.loc_path_scale) {
            return Err(Error::Config(format!(
                "loc_path_scale must lie in [0, 1], got {}",
                self.loc_path_scale
            )));
        }
        if self.policy_scale < 0.0 {
            return Err(Error::Config("policy_scale must be >= 0".into()));
        }
        Ok(())
    }
}

/// Which loss terms contribute when turning a trace into head gradients.
#[derive(Debug, Clone, Copy)]
pub struct SignalConfig {
    /// Full batch size M; every term is scaled by 1/M.
    pub batch_size: usize,
    /// Score-function terms plus baseline fitting.
    pub reinforce: bool,
    /// Cross-entropy on the final classification step.
    pub hybrid: bool,
    /// Multiplier on the baseline regression gradient.
    pub baseline_scale: f64,
    /// Multiplier on the location head's backward injection into the core.
    pub loc_path_scale: f64,
    /// Multiplier on the location-head REINFORCE signal.
    pub policy_scale: f64,
}

/// Converts a recorded episode into per-step head gradients.
///
/// Pure function of the trace; the heavy lifting (backpropagation through
/// the unrolled network) happens in `RamModel::backward_episode`.
pub fn episode_signals(
    trace: &EpisodeTrace,
    label: Option<usize>,
    sigma: f64,
    scfg: &SignalConfig,
) -> Result<EpisodeSignals> {
    let steps = trace.steps.len();
    let inv_m = 1.0 / scfg.batch_size.max(1) as f64;
    let mut loc_mean_grads = Vec::with_capacity(steps);
    let mut action_logit_grads = Vec::with_capacity(steps);
    let mut baseline_grads = Vec::with_capacity(steps);

    for (i, step) in trace.steps.iter().enumerate() {
        if trace.returns.len() <= i {
            return Err(Error::State("trace has fewer returns than steps".into()));
        }
        let advantage = trace.returns[i] - step.baseline;
        let last_step = i + 1 == steps;

        // Location: the sample drawn at the final step never feeds the
        // sensor, so it gets no score-function term.
        if scfg.reinforce && !last_step {
            let inv_var = 1.0 / (sigma * sigma);
            let w = scfg.policy_scale * advantage * inv_m;
            let dlogp = [
                (step.loc_sample_raw[0] - step.loc_mean[0]) * inv_var,
                (step.loc_sample_raw[1] - step.loc_mean[1]) * inv_var,
            ];
            loc_mean_grads.push([-w * dlogp[0], -w * dlogp[1]]);
        } else {
            loc_mean_grads.push([0.0, 0.0]);
        }

        // Action head: must be Some exactly where the forward ran the head,
        // so the backward pass pops every cache it pushed.
        let dlogits = match trace.protocol {
            ActionProtocol::FinalArgmax if last_step => {
                let probs = step.action_probs.as_ref().ok_or_else(|| {
                    Error::State("final classification step lacks action probabilities".into())
                })?;
                let mut d = vec![0.0; probs.len()];
                if scfg.hybrid {
                    let target = label.ok_or_else(|| {
                        Error::State("hybrid loss requires a class label".into())
                    })?;
                    if target >= probs.len() {
                        return Err(Error::Data(format!(
                            "label {target} out of range for {} classes",
                            probs.len()
                        )));
                    }
                    for (dk, pk) in d.iter_mut().zip(probs) {
                        *dk = pk * inv_m;
                    }
                    d[target] -= inv_m;
                }
                Some(d)
            }
            ActionProtocol::FinalArgmax => None,
            ActionProtocol::SampleEachStep => {
                let probs = step.action_probs.as_ref().ok_or_else(|| {
                    Error::State("sampled-action step lacks action probabilities".into())
                })?;
                let taken = step.action.ok_or_else(|| {
                    Error::State("sampled-action step lacks the taken action".into())
                })?;
                let mut d = vec![0.0; probs.len()];
                if scfg.reinforce {
                    let w = advantage * inv_m;
                    for (dk, pk) in d.iter_mut().zip(probs) {
                        *dk = w * pk;
                    }
                    d[taken] -= w;
                }
                Some(d)
            }
        };
        action_logit_grads.push(dlogits);

        // Baseline regression toward the observed return.
        baseline_grads.push(if scfg.reinforce {
            scfg.baseline_scale * 2.0 * (step.baseline - trace.returns[i]) * inv_m
        } else {
            0.0
        });
    }

    Ok(EpisodeSignals {
        loc_mean_grads,
        action_logit_grads,
        baseline_grads,
        loc_path_scale: scfg.loc_path_scale,
    })
}

/// The auto head-signal scale: one over the feature width the head reads.
pub fn resolved_head_scale(cfg_scale: f64, core_dim: usize) -> f64 {
    if cfg_scale == 0.0 {
        1.0 / core_dim.max(1) as f64
    } else {
        cfg_scale
    }
}

/// Accumulates REINFORCE-with-baseline gradients for a batch of traces the
/// model just produced (most recent trace last). The hybrid supervised term
/// is off.
pub fn reinforce_gradients(model: &mut RamModel, traces: &[EpisodeTrace]) -> Result<()> {
    let scfg = SignalConfig {
        batch_size: traces.len(),
        reinforce: true,
        hybrid: false,
        baseline_scale: resolved_head_scale(0.0, model.cfg.core_dim),
        loc_path_scale: 1.0,
        policy_scale: resolved_head_scale(0.0, model.cfg.core_dim),
    };
    for trace in traces.iter().rev() {
        let signals = episode_signals(trace, None, model.cfg.location_sigma, &scfg)?;
        model.backward_episode(&signals)?;
    }
    Ok(())
}

/// Accumulates only the supervised cross-entropy gradients for the most
/// recently rolled-out classification episode. The location head receives
/// nothing from this path.
pub fn hybrid_loss_gradients(model: &mut RamModel, trace: &EpisodeTrace, label: usize) -> Result<()> {
    let scfg = SignalConfig {
        batch_size: 1,
        reinforce: false,
        hybrid: true,
        baseline_scale: 0.0,
        loc_path_scale: 1.0,
        policy_scale: 1.0,
    };
    let signals = episode_signals(trace, Some(label), model.cfg.location_sigma, &scfg)?;
    model.backward_episode(&signals)
}

/// Both loss terms in one backward traversal, for a whole batch (labels are
/// `None` on reward-only environments).
pub fn accumulate_batch_gradients(
    model: &mut RamModel,
    batch: &[(EpisodeTrace, Option<usize>)],
    hybrid: bool,
) -> Result<()> {
    let scfg = SignalConfig {
        batch_size: batch.len(),
        reinforce: true,
        hybrid,
        baseline_scale: resolved_head_scale(0.0, model.cfg.core_dim),
        loc_path_scale: 1.0,
        policy_scale: resolved_head_scale(0.0, model.cfg.core_dim),
    };
    for (trace, label) in batch.iter().rev() {
        let signals = episode_signals(trace, *label, model.cfg.location_sigma, &scfg)?;
        model.backward_episode(&signals)?;
    }
    Ok(())
}

/// Per-epoch record, mirroring the metrics CSV schema.
#[derive(Debug, Clone, Copy)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub train_error: f64,
    pub val_error: f64,
    pub mean_reward: f64,
    pub mean_abs_advantage: f64,
    pub wall_seconds: f64,
}

pub const METRICS_CSV_HEADER: &str =
    "epoch,train_error,val_error,mean_reward,mean_abs_advantage,wall_seconds";

impl EpochMetrics {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:.3}",
            self.epoch,
            self.train_error,
            self.val_error,
            self.mean_reward,
            self.mean_abs_advantage,
            self.wall_seconds
        )
    }
}

#[derive(Default, Clone, Copy)]
struct RolloutStats {
    episodes: usize,
    wrong: usize,
    reward_sum: f64,
    abs_advantage_sum: f64,
    steps: usize,
}

impl RolloutStats {
    fn absorb(&mut self, other: &RolloutStats) {
        self.episodes += other.episodes;
        self.wrong += other.wrong;
        self.reward_sum += other.reward_sum;
        self.abs_advantage_sum += other.abs_advantage_sum;
        self.steps += other.steps;
    }

    fn record(&mut self, trace: &EpisodeTrace, correct: Option<bool>) {
        self.episodes += 1;
        if correct == Some(false) {
            self.wrong += 1;
        }
        self.reward_sum += trace.total_reward;
        for (r, s) in trace.returns.iter().zip(&trace.steps) {
            self.abs_advantage_sum += (r - s.baseline).abs();
            self.steps += 1;
        }
    }
}

/// What one batch chunk rolls out, per episode index.
enum EpisodeKind<'a> {
    Classification(&'a EpochStream<'a>),
    Catch,
}

fn run_chunk(
    model: &mut RamModel,
    kind: &EpisodeKind<'_>,
    indices: std::ops::Range<usize>,
    cfg: &TrainConfig,
    epoch: usize,
    full_batch: usize,
) -> Result<RolloutStats> {
    let policy_root = mix_seed(cfg.seed, "policy", epoch as u64);
    let env_root = mix_seed(cfg.seed, "env", epoch as u64);
    let mut stats = RolloutStats::default();
    let mut batch: Vec<(EpisodeTrace, Option<usize>)> = Vec::with_capacity(indices.len());
    for i in indices {
        let mut rng = substream(policy_root, "episode", i as u64);
        let (trace, label) = match kind {
            EpisodeKind::Classification(stream) => {
                let item = stream.example(i);
                let mut env = ClassificationEnv::new(
                    item.image,
                    item.label,
                    model.cfg.num_actions,
                    model.cfg.num_glimpses,
                );
                let trace =
                    rollout_episode(model, &mut env, &mut rng, RolloutMode::Train, i as u64)?;
                stats.record(&trace, Some(trace.prediction == Some(item.label)));
                (trace, Some(item.label))
            }
            EpisodeKind::Catch => {
                let mut env = CatchEnv::reset(&mut substream(env_root, "episode", i as u64));
                let trace =
                    rollout_episode(model, &mut env, &mut rng, RolloutMode::Train, i as u64)?;
                stats.record(&trace, Some(trace.total_reward > 0.0));
                (trace, None)
            }
        };
        batch.push((trace, label));
    }
    let hybrid = matches!(kind, EpisodeKind::Classification(_));
    let scfg = SignalConfig {
        batch_size: full_batch,
        reinforce: true,
        hybrid,
        baseline_scale: resolved_head_scale(cfg.baseline_scale, model.cfg.core_dim),
        loc_path_scale: cfg.loc_path_scale,
        policy_scale: resolved_head_scale(cfg.policy_scale, model.cfg.core_dim),
    };
    for (trace, label) in batch.iter().rev() {
        let signals = episode_signals(trace, *label, model.cfg.location_sigma, &scfg)?;
        model.backward_episode(&signals)?;
    }
    Ok(stats)
}

/// Rescales all accumulated gradients so their global norm is at most
/// `clip`. A no-op when `clip` is zero or the norm is already inside.
fn clip_global_grad_norm(model: &mut dyn Parameterized, clip: f64) {
    if clip <= 0.0 {
        return;
    }
    let mut sq = 0.0;
    model.visit_params(&mut |b| {
        for g in b.grad.data() {
            sq += g * g;
        }
    });
    let norm = sq.sqrt();
    if norm > clip && norm.is_finite() {
        let scale = clip / norm;
        model.visit_params_mut(&mut |b| {
            for g in b.grad.data_mut() {
                *g *= scale;
            }
        });
    }
}

fn check_params_finite(model: &RamModel) -> Result<()> {
    let mut bad: Option<String> = None;
    model.visit_params(&mut |b| {
        if bad.is_none() && !b.value.all_finite() {
            bad = Some(b.name().to_string());
        }
    });
    match bad {
        Some(block) => Err(Error::NonFinite { block }),
        None => Ok(()),
    }
}

fn train_epoch_impl(
    model: &mut RamModel,
    kind: EpisodeKind<'_>,
    episodes: usize,
    cfg: &TrainConfig,
    epoch: usize,
) -> Result<RolloutStats> {
    cfg.validate()?;
    let optimizer = SgdMomentum::new(cfg.learning_rate, cfg.momentum);
    let workers = cfg.workers;
    let mut worker_models: Vec<RamModel> = if workers > 1 {
        (0..workers).map(|_| model.clone()).collect()
    } else {
        Vec::new()
    };
    let mut stats = RolloutStats::default();

    let mut start = 0;
    while start < episodes {
        let end = (start + cfg.batch_size).min(episodes);
        let batch_len = end - start;
        if workers == 1 || batch_len < workers * 2 {
            let chunk_stats = run_chunk(model, &kind, start..end, cfg, epoch, batch_len)?;
            stats.absorb(&chunk_stats);
        } else {
            let chunk = batch_len.div_ceil(workers);
            let mut results: Vec<Result<RolloutStats>> = Vec::new();
            std::thread::scope(|scope| {
                let mut handles = Vec::new();
                for (w, wm) in worker_models.iter_mut().enumerate() {
                    let lo = start + w * chunk;
                    let hi = (lo + chunk).min(end);
                    if lo >= hi {
                        break;
                    }
                    let kind_ref = &kind;
                    handles.push(scope.spawn(move || {
                        wm.zero_grads();
                        run_chunk(wm, kind_ref, lo..hi, cfg, epoch, batch_len)
                    }));
                }
                for h in handles {
                    results.push(h.join().expect("worker thread panicked"));
                }
            });
            for (w, r) in results.into_iter().enumerate() {
                stats.absorb(&r?);
                model.add_grads_from(&worker_models[w]);
            }
        }
        clip_global_grad_norm(model, cfg.grad_clip);
        optimizer.step(model)?;
        check_params_finite(model)?;
        if workers > 1 {
            for wm in worker_models.iter_mut() {
                wm.copy_values_from(model);
            }
        }
        start = end;
    }
    Ok(stats)
}

/// Number of seeded validation episodes used for the catch per-epoch metric.
pub const CATCH_VALIDATION_EPISODES: usize = 200;
const CATCH_VALIDATION_SEED: u64 = 0x5eed_ca7c;
const CLASSIFICATION_VALIDATION_SEED: u64 = 0x5eed_e7a1;

/// One epoch of hybrid REINFORCE + cross-entropy training on a
/// classification task. Returns the epoch metrics (validation error is
/// measured deterministically on the held-out split).
pub fn train_epoch_classification(
    model: &mut RamModel,
    task: &Task,
    cfg: &TrainConfig,
    epoch: usize,
) -> Result<EpochMetrics> {
    let started = Instant::now();
    let stream = task.epoch_stream(cfg.seed, epoch, cfg.examples_per_epoch);
    let episodes = stream.len();
    let stats = train_epoch_impl(
        model,
        EpisodeKind::Classification(&stream),
        episodes,
        cfg,
        epoch,
    )?;
    let val_error = validation_error_classification(model, task, cfg.val_examples)?;
    Ok(EpochMetrics {
        epoch,
        train_error: stats.wrong as f64 / stats.episodes.max(1) as f64,
        val_error,
        mean_reward: stats.reward_sum / stats.episodes.max(1) as f64,
        mean_abs_advantage: stats.abs_advantage_sum / stats.steps.max(1) as f64,
        wall_seconds: started.elapsed().as_secs_f64(),
    })
}

/// Deterministic error on the validation split (optionally truncated).
pub fn validation_error_classification(
    model: &mut RamModel,
    task: &Task,
    val_examples: usize,
) -> Result<f64> {
    let count = if val_examples == 0 {
        task.validation_len()
    } else {
        val_examples.min(task.validation_len())
    };
    let mut wrong = 0usize;
    for i in 0..count {
        let item = task.validation_example(i);
        let rng = substream(CLASSIFICATION_VALIDATION_SEED, "eval-item", i as u64);
        if model.predict(&item.image, rng)? != item.label {
            wrong += 1;
        }
    }
    Ok(wrong as f64 / count.max(1) as f64)
}

/// One epoch of REINFORCE training on the Catch game, `episodes` drops long.
pub fn train_epoch_catch(
    model: &mut RamModel,
    cfg: &TrainConfig,
    epoch: usize,
    episodes: usize,
) -> Result<EpochMetrics> {
    let started = Instant::now();
    let stats = train_epoch_impl(model, EpisodeKind::Catch, episodes, cfg, epoch)?;
    let val = eval::eval_catch_rate(model, CATCH_VALIDATION_EPISODES, CATCH_VALIDATION_SEED)?;
    Ok(EpochMetrics {
        epoch,
        train_error: stats.wrong as f64 / stats.episodes.max(1) as f64,
        val_error: val.error_rate,
        mean_reward: stats.reward_sum / stats.episodes.max(1) as f64,
        mean_abs_advantage: stats.abs_advantage_sum / stats.steps.max(1) as f64,
        wall_seconds: started.elapsed().as_secs_f64(),
    })
}

/// One epoch of plain supervised training for a feedforward baseline model.
pub fn train_epoch_supervised<Mdl>(
    model: &mut Mdl,
    task: &Task,
    cfg: &TrainConfig,
    epoch: usize,
) -> Result<EpochMetrics>
where
    Mdl: crate::baselines::FeedForwardClassifier + Clone + Send,
{
    use crate::diffcore::{cross_entropy, softmax};
    cfg.validate()?;
    let started = Instant::now();
    let stream = task.epoch_stream(cfg.seed, epoch, cfg.examples_per_epoch);
    let n = stream.len();
    let optimizer = SgdMomentum::new(cfg.learning_rate, cfg.momentum);

    let run_range = |m: &mut Mdl, range: std::ops::Range<usize>, batch_len: usize| -> Result<(usize, f64)> {
        let mut wrong = 0usize;
        let mut loss_sum = 0.0;
        for i in range {
            let item = stream.example(i);
            let logits = m.forward_logits(&item.image, true)?;
            let probs = softmax(&logits);
            let (loss, mut dlogits) = cross_entropy(&probs, item.label)?;
            loss_sum += loss;
            let mut best = 0;
            for (k, p) in probs.iter().enumerate() {
                if *p > probs[best] {
                    best = k;
                }
            }
            if best != item.label {
                wrong += 1;
            }
            for d in dlogits.iter_mut() {
                *d /= batch_len as f64;
            }
            m.backward_from_logits(&dlogits)?;
        }
        Ok((wrong, loss_sum))
    };

    let workers = cfg.workers;
    let mut worker_models: Vec<Mdl> = if workers > 1 {
        (0..workers).map(|_| model.clone()).collect()
    } else {
        Vec::new()
    };
    let mut wrong_total = 0usize;
    let mut loss_total = 0.0;
    let mut start = 0;
    while start < n {
        let end = (start + cfg.batch_size).min(n);
        let batch_len = end - start;
        if workers == 1 || batch_len < workers * 2 {
            let (w, l) = run_range(model, start..end, batch_len)?;
            wrong_total += w;
            loss_total += l;
        } else {
            let chunk = batch_len.div_ceil(workers);
            let mut results: Vec<Result<(usize, f64)>> = Vec::new();
            std::thread::scope(|scope| {
                let mut handles = Vec::new();
                for (w, wm) in worker_models.iter_mut().enumerate() {
                    let lo = start + w * chunk;
                    let hi = (lo + chunk).min(end);
                    if lo >= hi {
                        break;
                    }
                    let run = &run_range;
                    handles.push(scope.spawn(move || {
                        wm.zero_grads();
                        run(wm, lo..hi, batch_len)
                    }));
                }
                for h in handles {
                    results.push(h.join().expect("worker thread panicked"));
                }
            });
            for (w, r) in results.into_iter().enumerate() {
                let (wr, l) = r?;
                wrong_total += wr;
                loss_total += l;
                model.add_grads_from(&worker_models[w]);
            }
        }
        clip_global_grad_norm(model, cfg.grad_clip);
        optimizer.step(model)?;
        if workers > 1 {
            for wm in worker_models.iter_mut() {
                wm.copy_values_from(model);
            }
        }
        start = end;
    }
    if !loss_total.is_finite() {
        return Err(Error::NonFinite {
            block: format!("{} training loss", model.name()),
        });
    }

    // Deterministic validation pass.
    let val_count = if cfg.val_examples == 0 {
        task.validation_len()
    } else {
        cfg.val_examples.min(task.validation_len())
    };
    let mut val_wrong = 0;
    for i in 0..val_count {
        let item = task.validation_example(i);
        let logits = model.forward_logits(&item.image, false)?;
        let mut best = 0;
        for (k, v) in logits.iter().enumerate() {
            if *v > logits[best] {
                best = k;
            }
        }
        if best != item.label {
            val_wrong += 1;
        }
    }

    Ok(EpochMetrics {
        epoch,
        train_error: wrong_total as f64 / n.max(1) as f64,
        val_error: val_wrong as f64 / val_count.max(1) as f64,
        mean_reward: 1.0 - wrong_total as f64 / n.max(1) as f64,
        mean_abs_advantage: loss_total / n.max(1) as f64,
        wall_seconds: started.elapsed().as_secs_f64(),
    })
}
