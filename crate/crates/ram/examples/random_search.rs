//! Random hyperparameter search over learning rate and policy sigma, with a
//! tiny per-trial budget so it finishes quickly. Prints the trial log and
//! the winning configuration.

use ram::datasets::{Task, TaskSpec};
use ram::glimpse::RetinaConfig;
use ram::learning::search::{random_search, SearchSpace, TRIAL_CSV_HEADER};
use ram::learning::{train_epoch_classification, TrainConfig};
use ram::model::{RamConfig, RamModel};
use ram::rng::substream;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data_dir = std::env::var("RAM_DATA_DIR").unwrap_or_else(|_| "data".into());
    let task = Task::load(TaskSpec::centered(), std::path::Path::new(&data_dir))?;

    let space = SearchSpace {
        learning_rate_log10: (-3.0, -1.0),
        sigma: (0.15, 0.6),
        sigma_log_scale: false,
        trials: 6,
    };
    let base = TrainConfig {
        epochs: 1,
        examples_per_epoch: 2_000,
        val_examples: 1_000,
        batch_size: 32,
        workers: 2,
        seed: 33,
        ..TrainConfig::default()
    };

    let retina = RetinaConfig::new(8, 1)?;
    let (best, log) = random_search(&space, &base, base.seed, |index, trial| {
        let cfg = RamConfig::classification(retina, 6, trial.sigma);
        let mut model = RamModel::new(cfg, &mut substream(base.seed, "trial-init", index as u64))?;
        let mut last = f64::INFINITY;
        for epoch in 0..trial.epochs {
            last = train_epoch_classification(&mut model, &task, trial, epoch)?.val_error;
        }
        println!("trial {index}: lr {:.5} sigma {:.3} -> val error {last:.3}", trial.learning_rate, trial.sigma);
        Ok(last)
    })?;

    println!("\n{TRIAL_CSV_HEADER}");
    for row in &log {
        println!("{}", row.csv_row());
    }
    println!("\nbest: lr {:.5}, sigma {:.3}", best.learning_rate, best.sigma);
    Ok(())
}
