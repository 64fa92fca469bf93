//! Trains the LSTM-core attention agent on Catch with REINFORCE only
//! (no labels exist here), printing the catch rate as it learns.
//!
//! The default budget is a short demo; `RAM_EPOCHS=20 RAM_EPISODES=1087`
//! reproduces a 500k-frame run (23 frames per episode).

use ram::learning::{train_epoch_catch, TrainConfig, METRICS_CSV_HEADER};
use ram::model::{RamConfig, RamModel};
use ram::rng::substream;

fn env_usize(name: &str, default: usize) -> usize {
    std::env::var(name).ok().and_then(|v| v.parse().ok()).unwrap_or(default)
}

fn env_f64(name: &str, default: f64) -> f64 {
    std::env::var(name).ok().and_then(|v| v.parse().ok()).unwrap_or(default)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = TrainConfig {
        learning_rate: env_f64("RAM_LR", 0.01),
        momentum: 0.9,
        batch_size: env_usize("RAM_BATCH", 16),
        epochs: env_usize("RAM_EPOCHS", 5),
        sigma: env_f64("RAM_SIGMA", 0.3),
        seed: env_usize("RAM_SEED", 1) as u64,
        examples_per_epoch: 0,
        val_examples: 0,
        workers: env_usize("RAM_WORKERS", 2),
        baseline_scale: env_f64("RAM_BASELINE_SCALE", 0.0),
        grad_clip: env_f64("RAM_CLIP", 2.0),
        loc_path_scale: env_f64("RAM_LOC_PATH", 1.0),
        policy_scale: env_f64("RAM_POLICY_SCALE", 0.0),
    };
    let episodes_per_epoch = env_usize("RAM_EPISODES", 200);

    let mut model_cfg = RamConfig::catch(23, cfg.sigma);
    model_cfg.discount = env_f64("RAM_GAMMA", 1.0);
    let mut model = RamModel::new(model_cfg, &mut substream(cfg.seed, "init", 0))?;
    println!(
        "catch: lstm core, 6x6 retina at 3 scales, {} episodes/epoch, lr {}, sigma {}",
        episodes_per_epoch, cfg.learning_rate, cfg.sigma
    );
    println!("{METRICS_CSV_HEADER}");
    for epoch in 0..cfg.epochs {
        let m = train_epoch_catch(&mut model, &cfg, epoch, episodes_per_epoch)?;
        println!("{}", m.csv_row());
    }
    println!("(train_error and val_error are miss rates; mean_reward is the catch rate)");
    Ok(())
}
