//! Run configuration: a flat `key = value` file with `[sections]`.
//!
//! Unknown sections or keys are rejected so typos fail loudly. Command-line
//! flags override file values; every run writes back a fully resolved
//! manifest that parses as a config again, which is what makes runs exactly
//! reproducible.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::baselines::BaselineKind;
use crate::datasets::{TaskSpec, DEFAULT_TASK_SEED};
use crate::error::{Error, Result};
use crate::glimpse::RetinaConfig;
use crate::learning::search::SearchSpace;
use crate::learning::TrainConfig;
use crate::model::{CoreKind, RamConfig};

/// What the run trains or evaluates on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TaskTarget {
    Classification(TaskSpec),
    Catch,
}

impl TaskTarget {
    pub fn name(&self) -> &'static str {
        match self {
            TaskTarget::Classification(spec) => spec.kind.name(),
            TaskTarget::Catch => "catch",
        }
    }
}

/// Which model family the run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelTarget {
    Ram,
    Baseline(BaselineKind),
}

/// Search-specific budget knobs on top of the sampled space.
#[derive(Debug, Clone, Copy)]
pub struct SearchBudget {
    pub space: SearchSpace,
    /// Epochs each trial trains for.
    pub trial_epochs: usize,
    /// Training examples per trial epoch (0 = full pass).
    pub trial_examples: usize,
}

/// A fully parsed run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub task: TaskTarget,
    pub model: ModelTarget,
    /// Retina / core geometry for the attention model.
    pub ram: RamShape,
    pub train: TrainConfig,
    pub search: Option<SearchBudget>,
    pub data_dir: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub checkpoint: Option<PathBuf>,
}

/// Architecture knobs that, joined with the task and sigma, produce a
/// `RamConfig`.
#[derive(Debug, Clone, Copy)]
pub struct RamShape {
    pub retina_width: usize,
    pub retina_scales: usize,
    pub glimpses: usize,
    pub core: CoreKind,
    pub glimpse_feature_dim: usize,
    pub glimpse_output_dim: usize,
    pub core_dim: usize,
    pub discount: f64,
    pub fc_hidden: usize,
}

impl RunConfig {
    /// Assembles the model config for this run's task.
    pub fn ram_config(&self) -> Result<RamConfig> {
        let retina = RetinaConfig::new(self.ram.retina_width, self.ram.retina_scales)?;
        let num_actions = match self.task {
            TaskTarget::Classification(_) => 10,
            TaskTarget::Catch => 3,
        };
        let cfg = RamConfig {
            retina,
            glimpse_feature_dim: self.ram.glimpse_feature_dim,
            glimpse_output_dim: self.ram.glimpse_output_dim,
            core_dim: self.ram.core_dim,
            core_kind: self.ram.core,
            num_glimpses: self.ram.glimpses,
            location_sigma: self.train.sigma,
            num_actions,
            discount: self.ram.discount,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Data directory resolution order: config file, `$RAM_DATA_DIR`, `./data`.
    pub fn resolve_data_dir(&self) -> PathBuf {
        if let Some(dir) = &self.data_dir {
            return dir.clone();
        }
        if let Ok(dir) = std::env::var("RAM_DATA_DIR") {
            return PathBuf::from(dir);
        }
        PathBuf::from("data")
    }

    /// Serializes the fully resolved configuration; parses back identically.
    pub fn manifest(&self, code_version: &str) -> String {
        let mut out = String::new();
        out.push_str(&format!("# resolved run manifest (code version {code_version})\n"));
        out.push_str("[task]\n");
        match self.task {
            TaskTarget::Classification(spec) => {
                out.push_str(&format!("kind = {}\n", spec.kind.name()));
                out.push_str(&format!("canvas = {}\n", spec.canvas));
                out.push_str(&format!("clutter = {}\n", spec.clutter_count));
                out.push_str(&format!("seed = {}\n", spec.seed));
            }
            TaskTarget::Catch => out.push_str("kind = catch\n"),
        }
        out.push_str("\n[model]\n");
        match self.model {
            ModelTarget::Ram => out.push_str("kind = ram\n"),
            ModelTarget::Baseline(BaselineKind::Fc2 { .. }) => out.push_str("kind = fc2\n"),
            ModelTarget::Baseline(BaselineKind::Conv2) => out.push_str("kind = conv2\n"),
        }
        out.push_str(&format!("hidden = {}\n", self.ram.fc_hidden));
        out.push_str(&format!("retina_width = {}\n", self.ram.retina_width));
        out.push_str(&format!("retina_scales = {}\n", self.ram.retina_scales));
        out.push_str(&format!("glimpses = {}\n", self.ram.glimpses));
        out.push_str(&format!(
            "core = {}\n",
            match self.ram.core {
                CoreKind::RectifierRnn => "rectifier",
                CoreKind::Lstm => "lstm",
            }
        ));
        out.push_str(&format!("glimpse_feature_dim = {}\n", self.ram.glimpse_feature_dim));
        out.push_str(&format!("glimpse_output_dim = {}\n", self.ram.glimpse_output_dim));
        out.push_str(&format!("core_dim = {}\n", self.ram.core_dim));
        out.push_str(&format!("discount = {}\n", self.ram.discount));
        out.push_str("\n[train]\n");
        out.push_str(&format!("learning_rate = {}\n", self.train.learning_rate));
        out.push_str(&format!("momentum = {}\n", self.train.momentum));
        out.push_str(&format!("batch_size = {}\n", self.train.batch_size));
        out.push_str(&format!("epochs = {}\n", self.train.epochs));
        out.push_str(&format!("sigma = {}\n", self.train.sigma));
        out.push_str(&format!("seed = {}\n", self.train.seed));
        out.push_str(&format!("examples_per_epoch = {}\n", self.train.examples_per_epoch));
        out.push_str(&format!("val_examples = {}\n", self.train.val_examples));
        out.push_str(&format!("workers = {}\n", self.train.workers));
        out.push_str(&format!("baseline_scale = {}\n", self.train.baseline_scale));
        out.push_str(&format!("grad_clip = {}\n", self.train.grad_clip));
        out.push_str(&format!("loc_path_scale = {}\n", self.train.loc_path_scale));
        out.push_str(&format!("policy_scale = {}\n", self.train.policy_scale));
        if let Some(s) = &self.search {
            out.push_str("\n[search]\n");
            out.push_str(&format!("trials = {}\n", s.space.trials));
            out.push_str(&format!("lr_log10_min = {}\n", s.space.learning_rate_log10.0));
            out.push_str(&format!("lr_log10_max = {}\n", s.space.learning_rate_log10.1));
            out.push_str(&format!("sigma_min = {}\n", s.space.sigma.0));
            out.push_str(&format!("sigma_max = {}\n", s.space.sigma.1));
            out.push_str(&format!("sigma_log = {}\n", s.space.sigma_log_scale));
            out.push_str(&format!("trial_epochs = {}\n", s.trial_epochs));
            out.push_str(&format!("trial_examples = {}\n", s.trial_examples));
        }
        out.push_str("\n[paths]\n");
        if let Some(d) = &self.data_dir {
            out.push_str(&format!("data_dir = {}\n", d.display()));
        }
        out.push_str(&format!("out_dir = {}\n", self.out_dir.display()));
        if let Some(c) = &self.checkpoint {
            out.push_str(&format!("checkpoint = {}\n", c.display()));
        }
        out
    }
}

fn parse_sections(text: &str) -> Result<BTreeMap<String, BTreeMap<String, String>>> {
    let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let name = name.trim().to_string();
            current = Some(name.clone());
            sections.entry(name).or_default();
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config(format!(
                "line {}: expected `key = value`, got `{line}`",
                lineno + 1
            )));
        };
        let section = current.clone().ok_or_else(|| {
            Error::Config(format!("line {}: key before any [section]", lineno + 1))
        })?;
        sections
            .get_mut(&section)
            .expect("section was just inserted")
            .insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(sections)
}

struct SectionReader {
    name: &'static str,
    values: BTreeMap<String, String>,
}

impl SectionReader {
    fn take(&mut self, key: &str) -> Option<String> {
        self.values.remove(key)
    }

    fn take_parsed<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        match self.take(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                Error::Config(format!("{}.{}: cannot parse `{raw}`", self.name, key))
            }),
        }
    }

    fn finish(self) -> Result<()> {
        if let Some(key) = self.values.keys().next() {
            return Err(Error::Config(format!(
                "unknown key `{}` in section [{}]",
                key, self.name
            )));
        }
        Ok(())
    }
}

/// Parses a config file's text into a run configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut sections = parse_sections(text)?;
    let known = ["task", "model", "train", "search", "paths"];
    if let Some(unknown) = sections.keys().find(|k| !known.contains(&k.as_str())) {
        return Err(Error::Config(format!("unknown section [{unknown}]")));
    }
    let mut section = |name: &'static str| SectionReader {
        name,
        values: sections.remove(name).unwrap_or_default(),
    };

    // [task]
    let mut task = section("task");
    let kind = task
        .take("kind")
        .ok_or_else(|| Error::Config("task.kind is required".into()))?;
    let canvas = task.take_parsed::<usize>("canvas")?;
    let clutter = task.take_parsed::<usize>("clutter")?;
    let task_seed = task.take_parsed::<u64>("seed")?.unwrap_or(DEFAULT_TASK_SEED);
    let task_target = match kind.as_str() {
        "centered" => TaskTarget::Classification(TaskSpec {
            seed: task_seed,
            ..TaskSpec::centered()
        }),
        "translated" => TaskTarget::Classification(TaskSpec {
            seed: task_seed,
            ..TaskSpec::translated(canvas.unwrap_or(60))
        }),
        "cluttered" => TaskTarget::Classification(TaskSpec {
            seed: task_seed,
            ..TaskSpec::cluttered(canvas.unwrap_or(60), clutter.unwrap_or(4))
        }),
        "catch" => TaskTarget::Catch,
        other => {
            return Err(Error::Config(format!(
                "task.kind must be centered|translated|cluttered|catch, got `{other}`"
            )))
        }
    };
    if let TaskTarget::Classification(spec) = &task_target {
        spec.validate()?;
    }
    task.finish()?;

    // [model]
    let mut model = section("model");
    let model_kind = model.take("kind").unwrap_or_else(|| "ram".into());
    let fc_hidden = model.take_parsed::<usize>("hidden")?.unwrap_or(256);
    let model_target = match model_kind.as_str() {
        "ram" => ModelTarget::Ram,
        "fc2" => ModelTarget::Baseline(BaselineKind::Fc2 { hidden: fc_hidden }),
        "conv2" => ModelTarget::Baseline(BaselineKind::Conv2),
        other => {
            return Err(Error::Config(format!(
                "model.kind must be ram|fc2|conv2, got `{other}`"
            )))
        }
    };
    let default_retina = match task_target {
        TaskTarget::Catch => (6, 3),
        TaskTarget::Classification(spec) if spec.canvas > 28 => (12, 3),
        _ => (8, 1),
    };
    let core_default = match task_target {
        TaskTarget::Catch => CoreKind::Lstm,
        _ => CoreKind::RectifierRnn,
    };
    let ram = RamShape {
        retina_width: model.take_parsed("retina_width")?.unwrap_or(default_retina.0),
        retina_scales: model.take_parsed("retina_scales")?.unwrap_or(default_retina.1),
        glimpses: model.take_parsed("glimpses")?.unwrap_or(match task_target {
            TaskTarget::Catch => 23,
            _ => 6,
        }),
        core: match model.take("core").as_deref() {
            None => core_default,
            Some("rectifier") => CoreKind::RectifierRnn,
            Some("lstm") => CoreKind::Lstm,
            Some(other) => {
                return Err(Error::Config(format!(
                    "model.core must be rectifier|lstm, got `{other}`"
                )))
            }
        },
        glimpse_feature_dim: model.take_parsed("glimpse_feature_dim")?.unwrap_or(128),
        glimpse_output_dim: model.take_parsed("glimpse_output_dim")?.unwrap_or(256),
        core_dim: model.take_parsed("core_dim")?.unwrap_or(256),
        discount: model.take_parsed("discount")?.unwrap_or(1.0),
        fc_hidden,
    };
    model.finish()?;

    // [train]
    let mut train = section("train");
    let train_cfg = TrainConfig {
        learning_rate: train.take_parsed("learning_rate")?.unwrap_or(0.001),
        momentum: train.take_parsed("momentum")?.unwrap_or(0.9),
        batch_size: train.take_parsed("batch_size")?.unwrap_or(32),
        epochs: train.take_parsed("epochs")?.unwrap_or(1),
        sigma: train.take_parsed("sigma")?.unwrap_or(0.25),
        seed: train.take_parsed("seed")?.unwrap_or(1),
        examples_per_epoch: train.take_parsed("examples_per_epoch")?.unwrap_or(0),
        val_examples: train.take_parsed("val_examples")?.unwrap_or(0),
        workers: train.take_parsed("workers")?.unwrap_or(1),
        baseline_scale: train.take_parsed("baseline_scale")?.unwrap_or(0.0),
        grad_clip: train.take_parsed("grad_clip")?.unwrap_or(10.0),
        loc_path_scale: train.take_parsed("loc_path_scale")?.unwrap_or(1.0),
        policy_scale: train.take_parsed("policy_scale")?.unwrap_or(0.0),
    };
    train_cfg.validate()?;
    train.finish()?;

    // [search]
    let mut search = section("search");
    let search_budget = if search.values.is_empty() {
        None
    } else {
        let space = SearchSpace {
            learning_rate_log10: (
                search.take_parsed("lr_log10_min")?.unwrap_or(-3.5),
                search.take_parsed("lr_log10_max")?.unwrap_or(-2.0),
            ),
            sigma: (
                search.take_parsed("sigma_min")?.unwrap_or(0.1),
                search.take_parsed("sigma_max")?.unwrap_or(0.6),
            ),
            sigma_log_scale: search.take_parsed("sigma_log")?.unwrap_or(false),
            trials: search.take_parsed("trials")?.unwrap_or(8),
        };
        space.validate()?;
        let budget = SearchBudget {
            space,
            trial_epochs: search.take_parsed("trial_epochs")?.unwrap_or(5),
            trial_examples: search.take_parsed("trial_examples")?.unwrap_or(0),
        };
        search.finish()?;
        Some(budget)
    };

    // [paths]
    let mut paths = section("paths");
    let data_dir = paths.take("data_dir").map(PathBuf::from);
    let out_dir = paths
        .take("out_dir")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("runs/latest"));
    let checkpoint = paths.take("checkpoint").map(PathBuf::from);
    paths.finish()?;

    Ok(RunConfig {
        task: task_target,
        model: model_target,
        ram,
        train: train_cfg,
        search: search_budget,
        data_dir,
        out_dir,
        checkpoint,
    })
}

pub fn parse_config_file(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = "
[task]
kind = cluttered
canvas = 60
clutter = 4

[model]
kind = ram
retina_width = 12
retina_scales = 3
glimpses = 6

[train]
learning_rate = 0.002
batch_size = 32
epochs = 10
sigma = 0.3
seed = 7

[paths]
out_dir = runs/test
";

    #[test]
    fn parses_a_complete_config() {
        let cfg = parse_config(GOOD).unwrap();
        match cfg.task {
            TaskTarget::Classification(spec) => {
                assert_eq!(spec.kind, crate::datasets::TaskKind::Cluttered);
                assert_eq!(spec.canvas, 60);
                assert_eq!(spec.clutter_count, 4);
            }
            _ => panic!("expected classification"),
        }
        assert_eq!(cfg.train.learning_rate, 0.002);
        assert_eq!(cfg.ram.glimpses, 6);
        let ram = cfg.ram_config().unwrap();
        assert_eq!(ram.retina.glimpse_len(), 12 * 12 * 3);
        assert_eq!(ram.num_actions, 10);
    }

    #[test]
    fn unknown_key_is_rejected_with_its_name() {
        let bad = GOOD.replace("batch_size = 32", "batchsize = 32");
        let err = parse_config(&bad).unwrap_err().to_string();
        assert!(err.contains("batchsize"), "{err}");
    }

    #[test]
    fn unknown_section_is_rejected() {
        let bad = format!("{GOOD}\n[extra]\nx = 1\n");
        let err = parse_config(&bad).unwrap_err().to_string();
        assert!(err.contains("extra"), "{err}");
    }

    #[test]
    fn task_kind_is_required() {
        assert!(parse_config("[train]\nseed = 1\n").is_err());
    }

    #[test]
    fn catch_defaults_to_lstm_and_23_glimpses() {
        let cfg = parse_config("[task]\nkind = catch\n").unwrap();
        assert_eq!(cfg.ram.glimpses, 23);
        assert!(matches!(cfg.ram.core, CoreKind::Lstm));
        let ram = cfg.ram_config().unwrap();
        assert_eq!(ram.num_actions, 3);
        assert_eq!(ram.retina.patch_width, 6);
        assert_eq!(ram.retina.num_scales, 3);
    }

    #[test]
    fn manifest_roundtrips_through_the_parser() {
        let mut cfg = parse_config(GOOD).unwrap();
        cfg.search = Some(SearchBudget {
            space: SearchSpace {
                learning_rate_log10: (-3.0, -2.0),
                sigma: (0.1, 0.5),
                sigma_log_scale: true,
                trials: 4,
            },
            trial_epochs: 2,
            trial_examples: 1000,
        });
        let manifest = cfg.manifest("0.1.0-test");
        let reparsed = parse_config(&manifest).unwrap();
        assert_eq!(reparsed.manifest("0.1.0-test"), manifest);
    }

    #[test]
    fn comments_and_blank_lines_are_ignored_and_flags_parse() {
        let text = "# top comment\n[task]\nkind = centered # inline\n\n[train]\nworkers = 2\n";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.train.workers, 2);
        assert_eq!(cfg.ram.retina_width, 8);
    }

    #[test]
    fn invalid_task_combination_fails_validation() {
        let text = "[task]\nkind = translated\ncanvas = 20\n";
        assert!(parse_config(text).is_err());
    }
}
