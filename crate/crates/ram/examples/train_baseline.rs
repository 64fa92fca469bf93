//! Trains a feedforward comparison model (fc2 or conv2) on a digit task.
//!
//! `RAM_BASELINE=fc2-256|fc2-64|conv2`, `RAM_TASK=centered|translated|cluttered`.

use ram::baselines::{Conv2Model, Fc2Model};
use ram::datasets::{Task, TaskSpec};
use ram::learning::{train_epoch_supervised, TrainConfig, METRICS_CSV_HEADER};
use ram::rng::substream;

fn env_usize(name: &str, default: usize) -> usize {
    std::env::var(name).ok().and_then(|v| v.parse().ok()).unwrap_or(default)
}

fn env_f64(name: &str, default: f64) -> f64 {
    std::env::var(name).ok().and_then(|v| v.parse().ok()).unwrap_or(default)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data_dir = std::env::var("RAM_DATA_DIR").unwrap_or_else(|_| "data".into());
    let task_name = std::env::var("RAM_TASK").unwrap_or_else(|_| "centered".into());
    let spec = match task_name.as_str() {
        "centered" => TaskSpec::centered(),
        "translated" => TaskSpec::translated(60),
        "cluttered" => TaskSpec::cluttered(60, 4),
        other => return Err(format!("unknown task {other}").into()),
    };
    let task = Task::load(spec, std::path::Path::new(&data_dir))?;

    let cfg = TrainConfig {
        learning_rate: env_f64("RAM_LR", 0.01),
        momentum: 0.9,
        batch_size: env_usize("RAM_BATCH", 20),
        epochs: env_usize("RAM_EPOCHS", 3),
        sigma: 0.25, // unused by feedforward models
        seed: env_usize("RAM_SEED", 1) as u64,
        examples_per_epoch: env_usize("RAM_EXAMPLES", 10_000),
        val_examples: env_usize("RAM_VAL", 2_000),
        workers: env_usize("RAM_WORKERS", 2),
        baseline_scale: env_f64("RAM_BASELINE_SCALE", 0.0),
        grad_clip: env_f64("RAM_CLIP", 10.0),
        loc_path_scale: env_f64("RAM_LOC_PATH", 1.0),
        policy_scale: env_f64("RAM_POLICY_SCALE", 0.0),
    };

    let kind = std::env::var("RAM_BASELINE").unwrap_or_else(|_| "fc2-256".into());
    println!("baseline {kind} on {task_name}, lr {}, batch {}", cfg.learning_rate, cfg.batch_size);
    println!("{METRICS_CSV_HEADER}");
    let mut rng = substream(cfg.seed, "init", 0);
    match kind.as_str() {
        "fc2-256" => {
            let mut model = Fc2Model::new(task.canvas(), 256, 10, &mut rng);
            for epoch in 0..cfg.epochs {
                println!("{}", train_epoch_supervised(&mut model, &task, &cfg, epoch)?.csv_row());
            }
        }
        "fc2-64" => {
            let mut model = Fc2Model::new(task.canvas(), 64, 10, &mut rng);
            for epoch in 0..cfg.epochs {
                println!("{}", train_epoch_supervised(&mut model, &task, &cfg, epoch)?.csv_row());
            }
        }
        "conv2" => {
            let mut model = Conv2Model::new(task.canvas(), 10, &mut rng);
            for epoch in 0..cfg.epochs {
                println!("{}", train_epoch_supervised(&mut model, &task, &cfg, epoch)?.csv_row());
            }
        }
        other => return Err(format!("unknown baseline {other}").into()),
    }
    Ok(())
}
