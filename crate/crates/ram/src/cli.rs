//! Command-line entry point.
//!
//! ```text
//! ram train            --config <path> [--seed N] [--workers N] [--out DIR]
//! ram eval             --config <path> --checkpoint <path> [--out DIR]
//! ram search           --config <path> [--seed N] [--workers N] [--out DIR]
//! ram render           --config <path> --checkpoint <path> [--out DIR]
//! ram generate-preview --config <path> [--out DIR]
//! ```
//!
//! Every run writes a `manifest.txt` into its output directory: the fully
//! resolved configuration (flags folded in), which reproduces the run when
//! fed back as `--config`. Exit codes: 0 success, 2 configuration problems,
//! 3 missing or malformed data, 1 anything else.

use std::path::{Path, PathBuf};

use rand_chacha::ChaCha8Rng;

use crate::baselines::{build_baseline, BaselineKind};
use crate::config::{parse_config_file, ModelTarget, RunConfig, TaskTarget};
use crate::datasets::Task;
use crate::diffcore::checkpoint;
use crate::env::{CatchEnv, Environment};
use crate::error::{Error, Result};
use crate::eval::{self, reference, EvalReport, Split};
use crate::learning::search::{random_search, TrialRecord, TRIAL_CSV_HEADER};
use crate::learning::{
    train_epoch_catch, train_epoch_classification, train_epoch_supervised, EpochMetrics,
    TrainConfig, METRICS_CSV_HEADER,
};
use crate::model::{rollout_episode, RamModel, RolloutMode};
use crate::rng::substream;
use crate::viz;

const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Catch training episodes per epoch when the config leaves it unset.
const DEFAULT_CATCH_EPISODES_PER_EPOCH: usize = 1000;
const EVAL_SEED: u64 = 0x5eed_e0a1;
const CATCH_EVAL_EPISODES: usize = 2000;

/// Runs the CLI; returns the process exit status.
pub fn run(args: &[String]) -> i32 {
    match dispatch(args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) => 2,
                Error::Io(_) | Error::Format { .. } | Error::Data(_) => 3,
                _ => 1,
            }
        }
    }
}

struct Flags {
    config: Option<PathBuf>,
    seed: Option<u64>,
    workers: Option<usize>,
    checkpoint: Option<PathBuf>,
    out: Option<PathBuf>,
}

fn parse_flags(args: &[String]) -> Result<Flags> {
    let mut flags = Flags {
        config: None,
        seed: None,
        workers: None,
        checkpoint: None,
        out: None,
    };
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let mut take = || {
            it.next()
                .cloned()
                .ok_or_else(|| Error::Config(format!("flag {arg} needs a value")))
        };
        match arg.as_str() {
            "--config" => flags.config = Some(PathBuf::from(take()?)),
            "--seed" => {
                flags.seed = Some(take()?.parse().map_err(|_| {
                    Error::Config("--seed needs an unsigned integer".into())
                })?)
            }
            "--workers" => {
                flags.workers = Some(take()?.parse().map_err(|_| {
                    Error::Config("--workers needs a positive integer".into())
                })?)
            }
            "--checkpoint" => flags.checkpoint = Some(PathBuf::from(take()?)),
            "--out" => flags.out = Some(PathBuf::from(take()?)),
            other => {
                return Err(Error::Config(format!("unknown flag `{other}`")));
            }
        }
    }
    Ok(flags)
}

fn load_run_config(flags: &Flags) -> Result<RunConfig> {
    let path = flags
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config <path> is required".into()))?;
    let mut cfg = parse_config_file(path)?;
    if let Some(seed) = flags.seed {
        cfg.train.seed = seed;
    }
    if let Some(workers) = flags.workers {
        cfg.train.workers = workers;
    }
    if let Some(ckpt) = &flags.checkpoint {
        cfg.checkpoint = Some(ckpt.clone());
    }
    if let Some(out) = &flags.out {
        cfg.out_dir = out.clone();
    }
    cfg.train.validate()?;
    Ok(cfg)
}

fn dispatch(args: &[String]) -> Result<()> {
    let Some(command) = args.first() else {
        return Err(Error::Config(
            "usage: ram <train|eval|search|render|generate-preview> --config <path>".into(),
        ));
    };
    let flags = parse_flags(&args[1..])?;
    let cfg = load_run_config(&flags)?;
    match command.as_str() {
        "train" => cmd_train(&cfg),
        "eval" => cmd_eval(&cfg),
        "search" => cmd_search(&cfg),
        "render" => cmd_render(&cfg),
        "generate-preview" => cmd_preview(&cfg),
        other => Err(Error::Config(format!(
            "unknown subcommand `{other}`; expected train|eval|search|render|generate-preview"
        ))),
    }
}

fn prepare_out_dir(cfg: &RunConfig) -> Result<()> {
    std::fs::create_dir_all(&cfg.out_dir)?;
    std::fs::write(cfg.out_dir.join("manifest.txt"), cfg.manifest(VERSION))?;
    Ok(())
}

fn load_task(cfg: &RunConfig) -> Result<Option<Task>> {
    match cfg.task {
        TaskTarget::Classification(spec) => {
            let dir = cfg.resolve_data_dir();
            let task = Task::load(spec, &dir).map_err(|e| match e {
                Error::Io(io) => Error::Io(std::io::Error::new(
                    io.kind(),
                    format!("cannot load digit data from {}: {io}", dir.display()),
                )),
                other => other,
            })?;
            Ok(Some(task))
        }
        TaskTarget::Catch => Ok(None),
    }
}

fn build_ram(cfg: &RunConfig) -> Result<RamModel> {
    let ram_cfg = cfg.ram_config()?;
    RamModel::new(ram_cfg, &mut substream(cfg.train.seed, "init", 0))
}

fn catch_episodes_per_epoch(train: &TrainConfig) -> usize {
    if train.examples_per_epoch == 0 {
        DEFAULT_CATCH_EPISODES_PER_EPOCH
    } else {
        train.examples_per_epoch
    }
}

fn append_metrics(path: &Path, rows: &[EpochMetrics]) -> Result<()> {
    let mut text = String::from(METRICS_CSV_HEADER);
    text.push('\n');
    for m in rows {
        text.push_str(&m.csv_row());
        text.push('\n');
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn cmd_train(cfg: &RunConfig) -> Result<()> {
    prepare_out_dir(cfg)?;
    let metrics_path = cfg.out_dir.join("metrics.csv");
    let ckpt_path = cfg.out_dir.join("checkpoint.bin");
    let mut rows: Vec<EpochMetrics> = Vec::new();

    match (cfg.model, &cfg.task) {
        (ModelTarget::Ram, TaskTarget::Classification(_)) => {
            let task = load_task(cfg)?.expect("classification task loads");
            let mut model = build_ram(cfg)?;
            checkpoint::save(&ckpt_path, &model)?;
            append_metrics(&metrics_path, &rows)?;
            for epoch in 0..cfg.train.epochs {
                let m = train_epoch_classification(&mut model, &task, &cfg.train, epoch)?;
                println!("{}", m.csv_row());
                rows.push(m);
                append_metrics(&metrics_path, &rows)?;
                checkpoint::save(&ckpt_path, &model)?;
            }
        }
        (ModelTarget::Ram, TaskTarget::Catch) => {
            let mut model = build_ram(cfg)?;
            checkpoint::save(&ckpt_path, &model)?;
            append_metrics(&metrics_path, &rows)?;
            let episodes = catch_episodes_per_epoch(&cfg.train);
            for epoch in 0..cfg.train.epochs {
                let m = train_epoch_catch(&mut model, &cfg.train, epoch, episodes)?;
                println!("{}", m.csv_row());
                rows.push(m);
                append_metrics(&metrics_path, &rows)?;
                checkpoint::save(&ckpt_path, &model)?;
            }
        }
        (ModelTarget::Baseline(kind), TaskTarget::Classification(_)) => {
            let task = load_task(cfg)?.expect("classification task loads");
            let mut rng = substream(cfg.train.seed, "init", 0);
            match kind {
                BaselineKind::Fc2 { hidden } => {
                    let mut model = crate::baselines::Fc2Model::new(task.canvas(), hidden, 10, &mut rng);
                    checkpoint::save(&ckpt_path, &model)?;
                    append_metrics(&metrics_path, &rows)?;
                    for epoch in 0..cfg.train.epochs {
                        let m = train_epoch_supervised(&mut model, &task, &cfg.train, epoch)?;
                        println!("{}", m.csv_row());
                        rows.push(m);
                        append_metrics(&metrics_path, &rows)?;
                        checkpoint::save(&ckpt_path, &model)?;
                    }
                }
                BaselineKind::Conv2 => {
                    let mut model = crate::baselines::Conv2Model::new(task.canvas(), 10, &mut rng);
                    checkpoint::save(&ckpt_path, &model)?;
                    append_metrics(&metrics_path, &rows)?;
                    for epoch in 0..cfg.train.epochs {
                        let m = train_epoch_supervised(&mut model, &task, &cfg.train, epoch)?;
                        println!("{}", m.csv_row());
                        rows.push(m);
                        append_metrics(&metrics_path, &rows)?;
                        checkpoint::save(&ckpt_path, &model)?;
                    }
                }
            }
        }
        (ModelTarget::Baseline(_), TaskTarget::Catch) => {
            return Err(Error::Config(
                "feedforward baselines only apply to classification tasks".into(),
            ));
        }
    }
    println!("checkpoint: {}", ckpt_path.display());
    Ok(())
}

/// Picks the published long-run reference for a (task, model) pairing.
fn reference_for(cfg: &RunConfig) -> Option<f64> {
    match (&cfg.task, cfg.model) {
        (TaskTarget::Classification(spec), ModelTarget::Ram) => {
            let r = &cfg.ram;
            match (spec.kind, spec.canvas, r.glimpses, r.retina_width, r.retina_scales) {
                (crate::datasets::TaskKind::Centered, 28, 6, 8, 1) => Some(reference::CENTERED_6G),
                (crate::datasets::TaskKind::Translated, 60, 6, 12, 3) => {
                    Some(reference::TRANSLATED_60_6G)
                }
                (crate::datasets::TaskKind::Cluttered, 60, 6, 12, 3) => {
                    Some(reference::CLUTTERED_60_6G)
                }
                (crate::datasets::TaskKind::Cluttered, 60, 8, 12, 3) => {
                    Some(reference::CLUTTERED_60_8G)
                }
                (crate::datasets::TaskKind::Cluttered, 100, 8, 12, 4) => {
                    Some(reference::CLUTTERED_100_8G)
                }
                _ => None,
            }
        }
        (TaskTarget::Classification(spec), ModelTarget::Baseline(kind)) => match (spec.kind, spec.canvas, kind) {
            (crate::datasets::TaskKind::Centered, 28, BaselineKind::Fc2 { hidden: 256 }) => {
                Some(reference::FC2_256_CENTERED)
            }
            (crate::datasets::TaskKind::Translated, 60, BaselineKind::Fc2 { hidden: 64 }) => {
                Some(reference::FC2_64_TRANSLATED_60)
            }
            (crate::datasets::TaskKind::Cluttered, 60, BaselineKind::Conv2) => {
                Some(reference::CONV2_CLUTTERED_60)
            }
            _ => None,
        },
        (TaskTarget::Catch, _) => Some(1.0 - reference::CATCH_RATE),
    }
}

fn write_report(cfg: &RunConfig, report: &EvalReport) -> Result<()> {
    let csv = format!("{}\n{}\n", EvalReport::csv_header(), report.csv_row());
    std::fs::write(cfg.out_dir.join("report.csv"), csv)?;
    std::fs::write(cfg.out_dir.join("report.txt"), report.summary_line() + "\n")?;
    println!("{}", report.summary_line());
    Ok(())
}

fn require_checkpoint(cfg: &RunConfig) -> Result<&PathBuf> {
    cfg.checkpoint.as_ref().ok_or_else(|| {
        Error::Config("a checkpoint is required (--checkpoint or [paths] checkpoint)".into())
    })
}

fn cmd_eval(cfg: &RunConfig) -> Result<()> {
    prepare_out_dir(cfg)?;
    let ckpt = require_checkpoint(cfg)?;
    match (cfg.model, &cfg.task) {
        (ModelTarget::Ram, TaskTarget::Classification(_)) => {
            let task = load_task(cfg)?.expect("classification task loads");
            let mut model = build_ram(cfg)?;
            checkpoint::load(ckpt, &mut model)?;
            let report =
                eval::evaluate_error(&mut model, &task, Split::Test, EVAL_SEED, reference_for(cfg))?;
            write_report(cfg, &report)
        }
        (ModelTarget::Ram, TaskTarget::Catch) => {
            let mut model = build_ram(cfg)?;
            checkpoint::load(ckpt, &mut model)?;
            let report = eval::eval_catch_rate(&mut model, CATCH_EVAL_EPISODES, EVAL_SEED)?;
            write_report(cfg, &report)
        }
        (ModelTarget::Baseline(kind), TaskTarget::Classification(_)) => {
            let task = load_task(cfg)?.expect("classification task loads");
            let mut model = build_baseline(kind, task.canvas(), &mut substream(cfg.train.seed, "init", 0));
            checkpoint::load(ckpt, model.as_mut())?;
            let report =
                eval::evaluate_error(&mut model, &task, Split::Test, EVAL_SEED, reference_for(cfg))?;
            write_report(cfg, &report)
        }
        (ModelTarget::Baseline(_), TaskTarget::Catch) => Err(Error::Config(
            "feedforward baselines only apply to classification tasks".into(),
        )),
    }
}

fn cmd_search(cfg: &RunConfig) -> Result<()> {
    prepare_out_dir(cfg)?;
    let budget = cfg.search.ok_or_else(|| {
        Error::Config("search needs a [search] section in the config".into())
    })?;
    let task = load_task(cfg)?;
    if matches!(cfg.model, ModelTarget::Baseline(_)) && task.is_none() {
        return Err(Error::Config(
            "feedforward baselines only apply to classification tasks".into(),
        ));
    }

    let base = TrainConfig {
        epochs: budget.trial_epochs,
        examples_per_epoch: budget.trial_examples,
        ..cfg.train
    };
    let search_seed = cfg.train.seed;
    let run_trial = |index: usize, trial: &TrainConfig| -> Result<f64> {
        let mut trial_cfg = cfg.clone();
        trial_cfg.train = *trial;
        match (&task, cfg.model) {
            (Some(task), ModelTarget::Ram) => {
                let ram_cfg = trial_cfg.ram_config()?;
                let mut model =
                    RamModel::new(ram_cfg, &mut substream(search_seed, "trial-init", index as u64))?;
                let mut last = f64::INFINITY;
                for epoch in 0..trial.epochs {
                    last = train_epoch_classification(&mut model, task, trial, epoch)?.val_error;
                }
                Ok(last)
            }
            (Some(task), ModelTarget::Baseline(kind)) => {
                let mut rng = substream(search_seed, "trial-init", index as u64);
                match kind {
                    BaselineKind::Fc2 { hidden } => {
                        let mut model = crate::baselines::Fc2Model::new(task.canvas(), hidden, 10, &mut rng);
                        let mut last = f64::INFINITY;
                        for epoch in 0..trial.epochs {
                            last = train_epoch_supervised(&mut model, task, trial, epoch)?.val_error;
                        }
                        Ok(last)
                    }
                    BaselineKind::Conv2 => {
                        let mut model = crate::baselines::Conv2Model::new(task.canvas(), 10, &mut rng);
                        let mut last = f64::INFINITY;
                        for epoch in 0..trial.epochs {
                            last = train_epoch_supervised(&mut model, task, trial, epoch)?.val_error;
                        }
                        Ok(last)
                    }
                }
            }
            (None, _) => {
                let mut trial_run = trial_cfg.clone();
                trial_run.train = *trial;
                let ram_cfg = trial_run.ram_config()?;
                let mut model =
                    RamModel::new(ram_cfg, &mut substream(search_seed, "trial-init", index as u64))?;
                let episodes = catch_episodes_per_epoch(trial);
                let mut last = f64::INFINITY;
                for epoch in 0..trial.epochs {
                    last = train_epoch_catch(&mut model, trial, epoch, episodes)?.val_error;
                }
                Ok(last)
            }
        }
    };

    let (best, log) = random_search(&budget.space, &base, search_seed, run_trial)?;
    let mut csv = String::from(TRIAL_CSV_HEADER);
    csv.push('\n');
    for row in &log {
        csv.push_str(&row.csv_row());
        csv.push('\n');
    }
    std::fs::write(cfg.out_dir.join("trials.csv"), csv)?;

    let mut best_cfg = cfg.clone();
    best_cfg.train.learning_rate = best.learning_rate;
    best_cfg.train.sigma = best.sigma;
    std::fs::write(cfg.out_dir.join("best_config.txt"), best_cfg.manifest(VERSION))?;
    let best_row: &TrialRecord = log
        .iter()
        .filter(|r| !r.diverged)
        .min_by(|a, b| a.metric.total_cmp(&b.metric))
        .expect("search succeeded, so a finite trial exists");
    println!(
        "best trial {}: lr {} sigma {} metric {}",
        best_row.index, best.learning_rate, best.sigma, best_row.metric
    );
    println!("wrote {}", cfg.out_dir.join("best_config.txt").display());
    Ok(())
}

/// Figures rendered by `render` for classification tasks.
const RENDER_COUNT: usize = 6;

fn cmd_render(cfg: &RunConfig) -> Result<()> {
    prepare_out_dir(cfg)?;
    let ckpt = require_checkpoint(cfg)?;
    if !matches!(cfg.model, ModelTarget::Ram) {
        return Err(Error::Config("render applies to the attention model".into()));
    }
    let mut model = build_ram(cfg)?;
    checkpoint::load(ckpt, &mut model)?;
    let epoch_tag = cfg.train.epochs;
    match &cfg.task {
        TaskTarget::Classification(_) => {
            let task = load_task(cfg)?.expect("classification task loads");
            for i in 0..RENDER_COUNT.min(task.test_len()) {
                let item = task.test_example(i);
                let mut env = crate::env::ClassificationEnv::new(
                    item.image.clone(),
                    item.label,
                    model.cfg.num_actions,
                    model.cfg.num_glimpses,
                );
                let mut rng: ChaCha8Rng = substream(cfg.train.seed, "render", i as u64);
                let trace = rollout_episode(
                    &mut model,
                    &mut env,
                    &mut rng,
                    RolloutMode::EvalStochastic,
                    i as u64,
                )?;
                let correct = trace.prediction == Some(item.label);
                let figure =
                    viz::render_glimpse_path(&trace, &item.image, &model.cfg.retina, correct);
                let stem = format!("{}_{}_{}", cfg.task.name(), epoch_tag, i);
                figure.write_ppm(&cfg.out_dir.join(format!("{stem}.ppm")))?;
                viz::write_trace_dump(&cfg.out_dir.join(format!("{stem}.trace.csv")), &trace)?;
            }
            println!("wrote {} figures to {}", RENDER_COUNT, cfg.out_dir.display());
        }
        TaskTarget::Catch => {
            for i in 0..2u64 {
                let mut env = CatchEnv::reset(&mut substream(cfg.train.seed, "render-env", i));
                env.set_recording(true);
                let mut rng = substream(cfg.train.seed, "render-policy", i);
                let trace =
                    rollout_episode(&mut model, &mut env, &mut rng, RolloutMode::EvalStochastic, i)?;
                let stem = format!("catch_{}_{}", epoch_tag, i);
                std::fs::write(
                    cfg.out_dir.join(format!("{stem}.replay.csv")),
                    viz::catch_replay_dump(env.history()),
                )?;
                viz::write_trace_dump(&cfg.out_dir.join(format!("{stem}.trace.csv")), &trace)?;
                // Per-step frame dump of the replayed episode.
                let mut frame_env = CatchEnv::reset(&mut substream(cfg.train.seed, "render-env", i));
                let mut step = 0usize;
                viz::Raster::from_gray(&frame_env.render())
                    .write_ppm(&cfg.out_dir.join(format!("{stem}_frame{step:02}.ppm")))?;
                for (_, _, action, _) in env.history() {
                    frame_env.step(Some(*action))?;
                    step += 1;
                    viz::Raster::from_gray(&frame_env.render())
                        .write_ppm(&cfg.out_dir.join(format!("{stem}_frame{step:02}.ppm")))?;
                }
            }
            println!("wrote 2 replays to {}", cfg.out_dir.display());
        }
    }
    Ok(())
}

fn cmd_preview(cfg: &RunConfig) -> Result<()> {
    prepare_out_dir(cfg)?;
    match &cfg.task {
        TaskTarget::Classification(_) => {
            let task = load_task(cfg)?.expect("classification task loads");
            let grid = viz::render_task_preview(&task, 8, 8);
            let path = cfg.out_dir.join(format!("{}_preview.ppm", cfg.task.name()));
            grid.write_ppm(&path)?;
            println!("wrote {}", path.display());
        }
        TaskTarget::Catch => {
            let mut grid = viz::Raster::black(4 * 25 - 1, 4 * 25 - 1);
            for i in 0..16u64 {
                let env = CatchEnv::reset(&mut substream(cfg.train.seed, "preview", i));
                let frame = viz::Raster::from_gray(&env.render());
                grid.blit(&frame, (i as usize % 4) * 25, (i as usize / 4) * 25);
            }
            let path = cfg.out_dir.join("catch_preview.ppm");
            grid.write_ppm(&path)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}
