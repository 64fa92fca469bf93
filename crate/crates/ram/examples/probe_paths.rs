//! Temporary diagnostics (deleted before release): isolates the supervised
//! path from the policy-gradient path on real data and reports live-unit
//! fractions plus per-path gradient norms.

use ram::datasets::{Task, TaskSpec};
use ram::diffcore::SgdMomentum;
use ram::env::ClassificationEnv;
use ram::glimpse::RetinaConfig;
use ram::learning::{episode_signals, validation_error_classification, SignalConfig, TrainConfig};
use ram::model::{rollout_episode, RamConfig, RamModel, RolloutMode};
use ram::rng::{mix_seed, substream};

fn env_f64(name: &str, default: f64) -> f64 {
    std::env::var(name).ok().and_then(|v| v.parse().ok()).unwrap_or(default)
}
fn env_usize(name: &str, default: usize) -> usize {
    std::env::var(name).ok().and_then(|v| v.parse().ok()).unwrap_or(default)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data_dir = std::env::var("RAM_DATA_DIR").unwrap_or_else(|_| "data".into());
    let task = Task::load(TaskSpec::centered(), std::path::Path::new(&data_dir))?;
    let lr = env_f64("RAM_LR", 0.01);
    let sigma = env_f64("RAM_SIGMA", 0.3);
    let batch = env_usize("RAM_BATCH", 32);
    let reinforce = std::env::var("RAM_CE_ONLY").is_err();
    let epochs = env_usize("RAM_EPOCHS", 2);
    let seed = env_usize("RAM_SEED", 1) as u64;

    let cfg = TrainConfig {
        learning_rate: lr,
        batch_size: batch,
        sigma,
        seed,
        ..TrainConfig::default()
    };
    let retina = RetinaConfig::new(8, 1)?;
    let mut model = RamModel::new(RamConfig::classification(retina, 6, sigma), &mut substream(seed, "init", 0))?;
    let optimizer = SgdMomentum::new(cfg.learning_rate, cfg.momentum);
    println!("reinforce={reinforce} lr={lr} sigma={sigma} batch={batch}");

    for epoch in 0..epochs {
        let stream = task.epoch_stream(cfg.seed, epoch, 50_000);
        let policy_root = mix_seed(cfg.seed, "policy", epoch as u64);
        let mut live_sum = 0.0;
        let mut live_n = 0usize;
        let mut mean_abs_sum = 0.0;
        let mut clamped = 0usize;
        let mut loc_n = 0usize;
        let batches = stream.len() / batch;
        for b in 0..batches {
            let mut traces = Vec::new();
            for i in (b * batch)..((b + 1) * batch) {
                let item = stream.example(i);
                let mut env = ClassificationEnv::new(item.image, item.label, 10, 6);
                let mut rng = substream(policy_root, "episode", i as u64);
                let trace = rollout_episode(&mut model, &mut env, &mut rng, RolloutMode::Train, i as u64)?;
                let h = &trace.steps.last().unwrap().hidden;
                live_sum += h.iter().filter(|&&v| v > 0.0).count() as f64 / h.len() as f64;
                live_n += 1;
                for s in &trace.steps {
                    mean_abs_sum += (s.loc_mean[0].abs() + s.loc_mean[1].abs()) / 2.0;
                    clamped += usize::from(s.loc_sample_raw[0].abs() > 1.0 || s.loc_sample_raw[1].abs() > 1.0);
                    loc_n += 1;
                }
                traces.push((trace, Some(item.label)));
            }
            let scfg = SignalConfig {
                batch_size: traces.len(),
                reinforce,
                hybrid: true,
                baseline_scale: 1.0 / 256.0,
                loc_path_scale: env_f64("RAM_LOC_PATH", 1.0),
                policy_scale: env_f64("RAM_POLICY_SCALE", 1.0 / 256.0),
            };
            for (trace, label) in traces.iter().rev() {
                let signals = episode_signals(trace, *label, sigma, &scfg)?;
                model.backward_episode(&signals)?;
            }
            if let Err(e) = optimizer.step(&mut model) {
                println!("DIVERGED at epoch {epoch} batch {b}: {e}");
                return Ok(());
            }
            if b % 400 == 0 {
                let ve = validation_error_classification(&mut model, &task, 1000)?;
                println!(
                    "  epoch {epoch} batch {b:5}: val {ve:.3}, live-units {:.2}, |mean| {:.2}, clamped {:.2}",
                    live_sum / live_n.max(1) as f64,
                    mean_abs_sum / loc_n.max(1) as f64,
                    clamped as f64 / loc_n.max(1) as f64
                );
                live_sum = 0.0;
                live_n = 0;
                mean_abs_sum = 0.0;
                clamped = 0;
                loc_n = 0;
            }
        }
        let ve = validation_error_classification(&mut model, &task, 2000)?;
        println!("epoch {epoch} done: val {ve:.4}");
    }
    Ok(())
}
