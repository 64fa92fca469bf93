//! Trains the attention model on centered 28x28 digits with 6 glimpses of an
//! 8x8 single-scale retina, printing per-epoch metrics.
//!
//! Expects the four MNIST IDX files in `$RAM_DATA_DIR` (default `./data`).
//! Override the quick-demo budget with env vars, e.g.
//! `RAM_EPOCHS=30 RAM_EXAMPLES=0` for a full run.

use ram::datasets::{Task, TaskSpec};
use ram::glimpse::RetinaConfig;
use ram::learning::{train_epoch_classification, TrainConfig, METRICS_CSV_HEADER};
use ram::model::{RamConfig, RamModel};
use ram::rng::substream;

fn env_usize(name: &str, default: usize) -> usize {
    std::env::var(name).ok().and_then(|v| v.parse().ok()).unwrap_or(default)
}

fn env_f64(name: &str, default: f64) -> f64 {
    std::env::var(name).ok().and_then(|v| v.parse().ok()).unwrap_or(default)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data_dir = std::env::var("RAM_DATA_DIR").unwrap_or_else(|_| "data".into());
    let task = Task::load(TaskSpec::centered(), std::path::Path::new(&data_dir))?;

    let glimpses = env_usize("RAM_GLIMPSES", 6);
    let sigma = env_f64("RAM_SIGMA", 0.25);
    let cfg = TrainConfig {
        learning_rate: env_f64("RAM_LR", 0.001),
        momentum: 0.9,
        batch_size: env_usize("RAM_BATCH", 20),
        epochs: env_usize("RAM_EPOCHS", 3),
        sigma,
        seed: env_usize("RAM_SEED", 1) as u64,
        examples_per_epoch: env_usize("RAM_EXAMPLES", 10_000),
        val_examples: env_usize("RAM_VAL", 2_000),
        workers: env_usize("RAM_WORKERS", 2),
        baseline_scale: env_f64("RAM_BASELINE_SCALE", 0.0),
        grad_clip: env_f64("RAM_CLIP", 10.0),
        loc_path_scale: env_f64("RAM_LOC_PATH", 1.0),
        policy_scale: env_f64("RAM_POLICY_SCALE", 0.0),
    };

    let retina = RetinaConfig::new(8, 1)?;
    let model_cfg = RamConfig::classification(retina, glimpses, cfg.sigma);
    let mut model = RamModel::new(model_cfg, &mut substream(cfg.seed, "init", 0))?;
    println!(
        "centered digits, {} glimpses, {} params, lr {}, sigma {}, batch {}",
        glimpses,
        ram::diffcore::Parameterized::param_count(&model),
        cfg.learning_rate,
        cfg.sigma,
        cfg.batch_size
    );
    println!("{METRICS_CSV_HEADER}");
    for epoch in 0..cfg.epochs {
        let m = train_epoch_classification(&mut model, &task, &cfg, epoch)?;
        println!("{}", m.csv_row());
    }
    Ok(())
}
