//! Trains the attention model on 60x60 translated digits with 6 glimpses of
//! a 12x12 three-scale retina. The model is the same size as for 28x28
//! digits; only the task grew.

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
    let canvas = env_usize("RAM_CANVAS", 60);
    let clutter = env_usize("RAM_CLUTTER", 0);
    let spec = if clutter > 0 {
        TaskSpec::cluttered(canvas, clutter)
    } else {
        TaskSpec::translated(canvas)
    };
    let task = Task::load(spec, std::path::Path::new(&data_dir))?;

    let cfg = TrainConfig {
        learning_rate: env_f64("RAM_LR", 0.01),
        momentum: 0.9,
        batch_size: env_usize("RAM_BATCH", 32),
        epochs: env_usize("RAM_EPOCHS", 2),
        sigma: env_f64("RAM_SIGMA", 0.25),
        seed: env_usize("RAM_SEED", 1) as u64,
        examples_per_epoch: env_usize("RAM_EXAMPLES", 10_000),
        val_examples: env_usize("RAM_VAL", 2_000),
        workers: env_usize("RAM_WORKERS", 2),
        baseline_scale: 0.0,
        grad_clip: env_f64("RAM_CLIP", 2.0),
        loc_path_scale: env_f64("RAM_LOC_PATH", 1.0),
        policy_scale: env_f64("RAM_POLICY_SCALE", 0.0),
    };

    let retina = RetinaConfig::new(
        env_usize("RAM_RETINA", 12),
        env_usize("RAM_SCALES", 3),
    )?;
    let model_cfg = RamConfig::classification(retina, env_usize("RAM_GLIMPSES", 6), cfg.sigma);
    let mut model = RamModel::new(model_cfg, &mut substream(cfg.seed, "init", 0))?;
    println!(
        "{} {}x{}, {} glimpses of {}x{} at {} scales, {} params",
        spec.kind.name(),
        canvas,
        canvas,
        model.cfg.num_glimpses,
        retina.patch_width,
        retina.patch_width,
        retina.num_scales,
        ram::diffcore::Parameterized::param_count(&model),
    );
    println!("{METRICS_CSV_HEADER}");
    for epoch in 0..cfg.epochs {
        let m = train_epoch_classification(&mut model, &task, &cfg, epoch)?;
        println!("{}", m.csv_row());
    }
    Ok(())
}
