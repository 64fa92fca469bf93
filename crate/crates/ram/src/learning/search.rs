//! Random search over learning rate and location-policy sigma.
//!
//! Trials are sampled independently (log-uniform learning rate, uniform or
//! log-uniform sigma), trained for a short fixed budget, and ranked by a
//! held-out metric where lower is better. The whole search is a pure
//! function of its seed.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::substream;

use super::TrainConfig;

/// Sampling ranges and trial count.
#[derive(Debug, Clone, Copy)]
pub struct SearchSpace {
    /// Inclusive log10 bounds for the learning rate.
    pub learning_rate_log10: (f64, f64),
    /// Inclusive bounds for sigma.
    pub sigma: (f64, f64),
    /// Sample sigma log-uniformly instead of uniformly.
    pub sigma_log_scale: bool,
    pub trials: usize,
}

impl SearchSpace {
    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::Config("search needs at least one trial".into()));
        }
        if self.learning_rate_log10.0 > self.learning_rate_log10.1 {
            return Err(Error::Config("empty learning-rate range".into()));
        }
        if self.sigma.0 > self.sigma.1 || self.sigma.0 <= 0.0 {
            return Err(Error::Config("sigma range must be positive and non-empty".into()));
        }
        Ok(())
    }
}

/// Outcome of a single trial.
#[derive(Debug, Clone, Copy)]
pub struct TrialRecord {
    pub index: usize,
    pub learning_rate: f64,
    pub sigma: f64,
    /// Held-out metric, lower is better. Infinite when the trial diverged.
    pub metric: f64,
    pub diverged: bool,
}

pub const TRIAL_CSV_HEADER: &str = "trial,learning_rate,sigma,metric,diverged";

impl TrialRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.index, self.learning_rate, self.sigma, self.metric, self.diverged
        )
    }
}

/// Draws the hyperparameters for trial `index`.
pub fn sample_trial(space: &SearchSpace, seed: u64, index: usize) -> (f64, f64) {
    let mut rng = substream(seed, "search-trial", index as u64);
    let lr_exp = rng.gen_range(space.learning_rate_log10.0..=space.learning_rate_log10.1);
    let sigma = if space.sigma_log_scale {
        let lo = space.sigma.0.ln();
        let hi = space.sigma.1.ln();
        rng.gen_range(lo..=hi).exp()
    } else {
        rng.gen_range(space.sigma.0..=space.sigma.1)
    };
    (10f64.powf(lr_exp), sigma)
}

/// Runs `space.trials` independent trials via the caller-supplied runner and
/// returns the best configuration and the full trial log.
///
/// The runner trains a fresh model with the trial's config for a short
/// budget and returns the validation metric (lower is better). Runner errors
/// mark the trial diverged; if every trial diverges the search fails,
/// carrying the log in the error message.
pub fn random_search<F>(
    space: &SearchSpace,
    base: &TrainConfig,
    seed: u64,
    mut run_trial: F,
) -> Result<(TrainConfig, Vec<TrialRecord>)>
where
    F: FnMut(usize, &TrainConfig) -> Result<f64>,
{
    space.validate()?;
    let mut log = Vec::with_capacity(space.trials);
    let mut best: Option<(f64, TrainConfig)> = None;
    for index in 0..space.trials {
        let (learning_rate, sigma) = sample_trial(space, seed, index);
        let trial_cfg = TrainConfig {
            learning_rate,
            sigma,
            ..*base
        };
        let record = match run_trial(index, &trial_cfg) {
            Ok(metric) if metric.is_finite() => TrialRecord {
                index,
                learning_rate,
                sigma,
                metric,
                diverged: false,
            },
            Ok(_) | Err(_) => TrialRecord {
                index,
                learning_rate,
                sigma,
                metric: f64::INFINITY,
                diverged: true,
            },
        };
        if !record.diverged && best.as_ref().is_none_or(|(m, _)| record.metric < *m) {
            best = Some((record.metric, trial_cfg));
        }
        log.push(record);
    }
    match best {
        Some((_, cfg)) => Ok((cfg, log)),
        None => {
            let mut lines = vec![TRIAL_CSV_HEADER.to_string()];
            lines.extend(log.iter().map(|r| r.csv_row()));
            Err(Error::Search(format!(
                "all {} trials diverged:\n{}",
                log.len(),
                lines.join("\n")
            )))
        }
    }
}
