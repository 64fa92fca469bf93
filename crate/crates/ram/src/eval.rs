//! Test-error and catch-rate evaluation with Wilson confidence intervals.
//!
//! Classification evaluation is deterministic: the location policy follows
//! its mean and classification is the argmax, with only the initial fixation
//! drawn from a per-item seeded stream. Catch evaluation keeps the stochastic
//! policy the agent was trained with, seeded for reproducibility.

use std::time::Instant;

use rand_chacha::ChaCha8Rng;

use crate::datasets::{LabeledImage, Task};
use crate::env::{CatchEnv, ClassificationEnv, Environment};
use crate::error::Result;
use crate::image::Image;
use crate::model::{rollout_episode, RamModel, RolloutMode};
use crate::rng::substream;

/// Published long-run error rates for the original attention model, kept in
/// reports for context next to desk-scale results.
pub mod reference {
    /// 28x28 centered digits, 6 glimpses, 8x8 retina, 1 scale.
    pub const CENTERED_6G: f64 = 0.0129;
    /// 60x60 translated, 6 glimpses, 12x12 retina, 3 scales.
    pub const TRANSLATED_60_6G: f64 = 0.0186;
    /// 60x60 cluttered (4 pieces), 6 glimpses, 12x12, 3 scales.
    pub const CLUTTERED_60_6G: f64 = 0.0588;
    /// 60x60 cluttered, 8 glimpses.
    pub const CLUTTERED_60_8G: f64 = 0.0523;
    /// 100x100 cluttered (8 pieces), 8 glimpses, 12x12, 4 scales.
    pub const CLUTTERED_100_8G: f64 = 0.1083;
    /// Two-layer fully connected net (256 hiddens) on centered digits.
    pub const FC2_256_CENTERED: f64 = 0.0135;
    /// Two-layer fully connected net (64 hiddens) on 60x60 translated.
    pub const FC2_64_TRANSLATED_60: f64 = 0.0756;
    /// Two-layer convolutional net on 60x60 cluttered.
    pub const CONV2_CLUTTERED_60: f64 = 0.0783;
    /// Long-run catch rate of the attention agent on the falling-ball game.
    pub const CATCH_RATE: f64 = 0.85;
}

/// Evaluation summary for one model on one task.
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub task: String,
    pub model: String,
    /// Misclassified fraction (classification) or miss fraction (catch).
    pub error_rate: f64,
    pub episode_count: usize,
    /// Half-width of the 95% Wilson interval around the error rate.
    pub confidence_half_width: f64,
    pub wall_seconds: f64,
    /// Published long-run reference for this setting, when one exists.
    pub reference_error: Option<f64>,
}

impl EvalReport {
    pub fn accuracy(&self) -> f64 {
        1.0 - self.error_rate
    }

    pub fn csv_header() -> &'static str {
        "task,model,error_rate,episode_count,wilson_half_width,wall_seconds,reference_error"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:.3},{}",
            self.task,
            self.model,
            self.error_rate,
            self.episode_count,
            self.confidence_half_width,
            self.wall_seconds,
            self.reference_error.map_or(String::new(), |r| r.to_string()),
        )
    }

    pub fn summary_line(&self) -> String {
        let reference = self
            .reference_error
            .map_or(String::new(), |r| format!(" (long-run reference {:.2}%)", r * 100.0));
        format!(
            "{} / {}: error {:.2}% +/- {:.2}% over {} episodes{}",
            self.task,
            self.model,
            self.error_rate * 100.0,
            self.confidence_half_width * 100.0,
            self.episode_count,
            reference
        )
    }
}

/// 95% Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    wilson_interval_z(successes, trials, 1.959_963_985)
}

pub fn wilson_interval_z(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let spread = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - spread).max(0.0), (center + spread).min(1.0))
}

/// Anything that maps an image to a predicted class. The rng carries the
/// per-item evaluation stream (the attention model draws its initial
/// fixation from it; feedforward baselines ignore it).
pub trait ImageClassifier {
    fn predict(&mut self, image: &Image, item_rng: ChaCha8Rng) -> Result<usize>;
    fn model_name(&self) -> String;
}

impl ImageClassifier for RamModel {
    fn predict(&mut self, image: &Image, mut item_rng: ChaCha8Rng) -> Result<usize> {
        let mut env = ClassificationEnv::new(image.clone(), 0, self.cfg.num_actions, self.cfg.num_glimpses);
        let trace = rollout_episode(
            self,
            &mut env,
            &mut item_rng,
            RolloutMode::EvalDeterministic,
            0,
        )?;
        Ok(trace.prediction.expect("classification rollout always predicts"))
    }

    fn model_name(&self) -> String {
        format!(
            "ram-{}g-{}x{}-{}s",
            self.cfg.num_glimpses,
            self.cfg.retina.patch_width,
            self.cfg.retina.patch_width,
            self.cfg.retina.num_scales
        )
    }
}

/// Which generated split to evaluate on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Validation,
    Test,
}

/// Error rate of `model` over a full task split, deterministically.
pub fn evaluate_error(
    model: &mut dyn ImageClassifier,
    task: &Task,
    split: Split,
    eval_seed: u64,
    reference_error: Option<f64>,
) -> Result<EvalReport> {
    let started = Instant::now();
    let count = match split {
        Split::Validation => task.validation_len(),
        Split::Test => task.test_len(),
    };
    let fetch = |i: usize| -> LabeledImage {
        match split {
            Split::Validation => task.validation_example(i),
            Split::Test => task.test_example(i),
        }
    };
    let mut wrong = 0usize;
    for i in 0..count {
        let item = fetch(i);
        let rng = substream(eval_seed, "eval-item", i as u64);
        if model.predict(&item.image, rng)? != item.label {
            wrong += 1;
        }
    }
    let (lo, hi) = wilson_interval(wrong, count);
    Ok(EvalReport {
        task: format!("{}-{}", task.spec.kind.name(), task.canvas()),
        model: model.model_name(),
        error_rate: wrong as f64 / count.max(1) as f64,
        episode_count: count,
        confidence_half_width: (hi - lo) / 2.0,
        wall_seconds: started.elapsed().as_secs_f64(),
        reference_error,
    })
}

/// Catch rate over seeded episodes with the stochastic policy retained.
/// Reported as an `EvalReport` whose error is the miss rate.
pub fn eval_catch_rate(model: &mut RamModel, episodes: usize, eval_seed: u64) -> Result<EvalReport> {
    let started = Instant::now();
    let mut caught = 0usize;
    for i in 0..episodes {
        let mut env = CatchEnv::reset(&mut substream(eval_seed, "catch-env", i as u64));
        let mut rng = substream(eval_seed, "catch-policy", i as u64);
        let trace = rollout_episode(model, &mut env, &mut rng, RolloutMode::EvalStochastic, i as u64)?;
        if trace.total_reward > 0.0 {
            caught += 1;
        }
    }
    let (lo, hi) = wilson_interval(episodes - caught, episodes);
    Ok(EvalReport {
        task: "catch".into(),
        model: format!("ram-lstm-{}g", model.cfg.num_glimpses),
        error_rate: (episodes - caught) as f64 / episodes.max(1) as f64,
        episode_count: episodes,
        confidence_half_width: (hi - lo) / 2.0,
        wall_seconds: started.elapsed().as_secs_f64(),
        reference_error: Some(1.0 - reference::CATCH_RATE),
    })
}

/// Catch rate of the hand-coded landing-column tracker; the environment
/// solvability oracle.
pub fn tracker_catch_rate(episodes: usize, eval_seed: u64) -> f64 {
    let mut caught = 0usize;
    for i in 0..episodes {
        let mut env = CatchEnv::reset(&mut substream(eval_seed, "tracker-env", i as u64));
        let mut reward = 0.0;
        while !env.terminal() {
            let action = crate::env::greedy_tracker_action(&env.state());
            reward = env.step(Some(action)).expect("tracker obeys protocol").reward;
        }
        if reward > 0.0 {
            caught += 1;
        }
    }
    caught as f64 / episodes.max(1) as f64
}

/// Catch rate of a uniform-random action policy; the floor a learned agent
/// must clear.
pub fn random_policy_catch_rate(episodes: usize, eval_seed: u64) -> f64 {
    use rand::Rng;
    let mut caught = 0usize;
    for i in 0..episodes {
        let mut env = CatchEnv::reset(&mut substream(eval_seed, "random-env", i as u64));
        let mut rng = substream(eval_seed, "random-policy", i as u64);
        let mut reward = 0.0;
        while !env.terminal() {
            let action = rng.gen_range(0..crate::env::CATCH_ACTIONS);
            reward = env.step(Some(action)).expect("env accepts all actions").reward;
        }
        if reward > 0.0 {
            caught += 1;
        }
    }
    caught as f64 / episodes.max(1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::{MnistSet, TaskSpec};
    use crate::glimpse::RetinaConfig;
    use crate::model::RamConfig;

    #[test]
    fn wilson_interval_brackets_the_point_estimate() {
        let (lo, hi) = wilson_interval(10, 100);
        assert!(lo < 0.1 && 0.1 < hi);
        assert!(lo > 0.0 && hi < 1.0);
        // Known value: 10/100 at 95% is roughly [0.055, 0.176].
        assert!((lo - 0.0552).abs() < 0.002, "{lo}");
        assert!((hi - 0.1744).abs() < 0.002, "{hi}");
    }

    #[test]
    fn wilson_interval_handles_extremes() {
        let (lo, hi) = wilson_interval(0, 50);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.2);
        let (lo, hi) = wilson_interval(50, 50);
        assert!(lo > 0.8);
        assert_eq!(hi, 1.0);
        assert_eq!(wilson_interval(0, 0), (0.0, 1.0));
    }

    fn tiny_task() -> Task {
        let mut pixels = Vec::new();
        let mut labels = Vec::new();
        for i in 0..24usize {
            let mut img = vec![0u8; 28 * 28];
            // A bright block whose position depends on the label.
            let label = i % 3;
            for y in 0..8 {
                for x in 0..8 {
                    img[(y + 4) * 28 + x + 4 + label * 6] = 250;
                }
            }
            pixels.extend(img);
            labels.push(label as u8);
        }
        Task::from_sets(
            TaskSpec::centered(),
            MnistSet::from_parts(28, 28, pixels.clone(), labels.clone()).unwrap(),
            MnistSet::from_parts(28, 28, pixels, labels).unwrap(),
        )
    }

    struct Oracle;
    impl ImageClassifier for Oracle {
        fn predict(&mut self, image: &Image, _rng: ChaCha8Rng) -> Result<usize> {
            // Recover the label from the block position.
            for label in 0..3 {
                if image.get(4 + label * 6, 4) > 0.5 {
                    return Ok(label);
                }
            }
            Ok(0)
        }
        fn model_name(&self) -> String {
            "oracle".into()
        }
    }

    struct Constant(usize);
    impl ImageClassifier for Constant {
        fn predict(&mut self, _image: &Image, _rng: ChaCha8Rng) -> Result<usize> {
            Ok(self.0)
        }
        fn model_name(&self) -> String {
            "constant".into()
        }
    }

    #[test]
    fn perfect_model_scores_zero_error() {
        let task = tiny_task();
        let report = evaluate_error(&mut Oracle, &task, Split::Test, 1, None).unwrap();
        assert_eq!(report.error_rate, 0.0);
        assert_eq!(report.episode_count, task.test_len());
    }

    #[test]
    fn constant_model_scores_chance_level() {
        let task = tiny_task();
        let report = evaluate_error(&mut Constant(0), &task, Split::Test, 1, None).unwrap();
        // Labels are uniform over 3 classes.
        assert!((report.error_rate - 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn error_rate_matches_independent_counting_pass() {
        let task = tiny_task();
        let mut model = Constant(1);
        let report = evaluate_error(&mut model, &task, Split::Test, 1, None).unwrap();
        let mut wrong = 0;
        for i in 0..task.test_len() {
            if task.test_example(i).label != 1 {
                wrong += 1;
            }
        }
        assert_eq!(report.error_rate, wrong as f64 / task.test_len() as f64);
    }

    #[test]
    fn deterministic_evaluation_is_reproducible() {
        let task = tiny_task();
        let cfg = RamConfig::classification(RetinaConfig::new(4, 1).unwrap(), 2, 0.2);
        let mut model = RamModel::new(cfg, &mut substream(60, "eval-model", 0)).unwrap();
        let a = evaluate_error(&mut model, &task, Split::Test, 5, None).unwrap();
        let b = evaluate_error(&mut model, &task, Split::Test, 5, None).unwrap();
        assert_eq!(a.error_rate, b.error_rate);
    }

    #[test]
    fn tracker_is_perfect_and_random_policy_is_weak() {
        let tracker = tracker_catch_rate(300, 7);
        assert_eq!(tracker, 1.0);
        let random = random_policy_catch_rate(300, 7);
        assert!(random < 0.5, "random policy caught {random}");
    }
}
