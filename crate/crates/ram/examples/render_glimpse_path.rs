//! Rolls out the attention model on one test digit and writes the
//! glimpse-path figure: the input with the fixation path overlaid, then one
//! panel per step showing exactly what the sensor delivered.
//!
//! Uses an untrained model by default, so expect a wandering path; point
//! `RAM_CHECKPOINT` at a trained checkpoint for purposeful fixations.

use ram::datasets::{Task, TaskSpec};
use ram::env::ClassificationEnv;
use ram::glimpse::RetinaConfig;
use ram::model::{rollout_episode, RamConfig, RamModel, RolloutMode};
use ram::rng::substream;
use ram::viz::render_glimpse_path;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data_dir = std::env::var("RAM_DATA_DIR").unwrap_or_else(|_| "data".into());
    let task = Task::load(TaskSpec::translated(60), std::path::Path::new(&data_dir))?;

    let retina = RetinaConfig::new(12, 3)?;
    let cfg = RamConfig::classification(retina, 6, 0.25);
    let mut model = RamModel::new(cfg, &mut substream(5, "init", 0))?;
    if let Ok(ckpt) = std::env::var("RAM_CHECKPOINT") {
        ram::diffcore::checkpoint::load(std::path::Path::new(&ckpt), &mut model)?;
        println!("loaded checkpoint {ckpt}");
    }

    for i in 0..3 {
        let item = task.test_example(i);
        let mut env = ClassificationEnv::new(item.image.clone(), item.label, 10, 6);
        let mut rng = substream(5, "render", i as u64);
        let trace = rollout_episode(&mut model, &mut env, &mut rng, RolloutMode::EvalStochastic, i as u64)?;
        let correct = trace.prediction == Some(item.label);
        let name = format!("glimpse_path_{i}.ppm");
        render_glimpse_path(&trace, &item.image, &model.cfg.retina, correct)
            .write_ppm(std::path::Path::new(&name))?;
        println!(
            "{name}: label {} predicted {:?} ({})",
            item.label,
            trace.prediction.unwrap(),
            if correct { "correct, green path" } else { "wrong, red path" }
        );
    }
    Ok(())
}
