//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with its measurements when it holds.
//!
//! Fast criteria run in a normal `cargo test`. The multi-hour training
//! criteria are `#[ignore]`d by default and run with
//! `cargo test -p ram --test acceptance -- --include-ignored` (they need the
//! MNIST IDX files; see `data_dir()` for resolution).

use std::path::PathBuf;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use ram::baselines::{Conv2Model, Fc2Model};
use ram::datasets::{Task, TaskSpec};
use ram::diffcore::{gaussian_logprob, Parameterized};
use ram::env::{ActionProtocol, CatchEnv, ClassificationEnv, Environment};
use ram::eval::{
    eval_catch_rate, evaluate_error, random_policy_catch_rate, tracker_catch_rate,
    wilson_interval, ImageClassifier, Split,
};
use ram::glimpse::{build_glimpse, GlimpseLocation, RetinaConfig};
use ram::gradcheck::{check_gradients, check_gradients_subset};
use ram::image::Image;
use ram::learning::{
    accumulate_batch_gradients, train_epoch_catch, train_epoch_classification,
    train_epoch_supervised, TrainConfig,
};
use ram::model::{
    rollout_episode, CoreKind, EpisodeReplay, RamConfig, RamModel, RolloutMode,
};
use ram::rng::{standard_normal, substream};
use ram::viz::render_reconstruction;

// ---------------------------------------------------------------------------
// Pinned desk-scale budgets and thresholds.

/// Criterion 4: centered digits, 6 glimpses. Test error the run must reach.
const C4_TARGET_ERROR: f64 = 0.05;
const C4_MAX_EPOCHS: usize = 30;
const C4_TRAIN: TrainConfig = TrainConfig {
    learning_rate: 0.01,
    momentum: 0.9,
    batch_size: 32,
    epochs: C4_MAX_EPOCHS,
    sigma: 0.25,
    seed: 41,
    examples_per_epoch: 0,
    val_examples: 2000,
    workers: 2,
    baseline_scale: 0.0,
    grad_clip: 10.0,
    loc_path_scale: 0.0,
    policy_scale: 0.0,
};

/// Criterion 5: shared budget for the glimpse-count trend.
const C5_EPOCHS: usize = 5;
const C5_SEEDS: [u64; 3] = [11, 12, 13];

/// Criteria 6 and 7: fixed reduced budget per the protocol.
const C67_EPOCHS: usize = 10;
const C67_EXAMPLES_PER_EPOCH: usize = 100_000;
const C67_SEEDS: [u64; 3] = [21, 22, 23];

/// Criterion 9: 500k frames of Catch at 23 frames per episode.
const C9_EPISODES: usize = 21_740;
const C9_EPOCHS: usize = 20;
const C9_TRAIN: TrainConfig = TrainConfig {
    learning_rate: 0.003,
    momentum: 0.9,
    batch_size: 16,
    epochs: C9_EPOCHS,
    sigma: 0.3,
    seed: 51,
    examples_per_epoch: C9_EPISODES / C9_EPOCHS,
    val_examples: 0,
    workers: 2,
    baseline_scale: 0.0,
    grad_clip: 10.0,
    loc_path_scale: 0.0,
    policy_scale: 0.0,
};

fn data_dir() -> PathBuf {
    if let Ok(dir) = std::env::var("RAM_DATA_DIR") {
        return PathBuf::from(dir);
    }
    for candidate in ["data", "../data", "../../data"] {
        let p = PathBuf::from(candidate);
        if p.join("train-images-idx3-ubyte").exists() {
            return p;
        }
    }
    panic!("MNIST IDX files not found; set RAM_DATA_DIR or place them in ./data");
}

fn load_task(spec: TaskSpec) -> Task {
    Task::load(spec, &data_dir()).expect("task data loads")
}

// ---------------------------------------------------------------------------
// Criterion 1: gradient integrity of every operation and the unrolled model.

fn tiny_ram_cfg(core: CoreKind, protocol: ActionProtocol, rng: &mut ChaCha8Rng) -> RamConfig {
    RamConfig {
        retina: RetinaConfig {
            patch_width: rng.gen_range(1..3),
            num_scales: rng.gen_range(1..3),
        },
        glimpse_feature_dim: rng.gen_range(2..5),
        glimpse_output_dim: rng.gen_range(2..5),
        core_dim: rng.gen_range(2..6),
        core_kind: core,
        num_glimpses: 3,
        location_sigma: rng.gen_range(0.2..0.6),
        num_actions: match protocol {
            ActionProtocol::FinalArgmax => 10,
            ActionProtocol::SampleEachStep => 3,
        },
        discount: 1.0,
    }
}

#[test]
fn criterion_1_gradient_integrity() {
    let instances = 50;
    let mut worst: f64 = 0.0;
    for i in 0..instances {
        let mut rng = substream(1000, "c1", i);
        let catch_style = i % 2 == 1;
        let (core, protocol) = if catch_style {
            (CoreKind::Lstm, ActionProtocol::SampleEachStep)
        } else {
            (CoreKind::RectifierRnn, ActionProtocol::FinalArgmax)
        };
        let cfg = tiny_ram_cfg(core, protocol, &mut rng);
        let mut model = RamModel::new(cfg, &mut rng).unwrap();

        // Roll one training episode with full caching.
        let (trace, frames, label) = if catch_style {
            let mut env = CatchEnv::reset(&mut substream(1000, "c1-env", i));
            let trace = rollout_episode(&mut model, &mut env, &mut rng, RolloutMode::Train, i)
                .unwrap();
            // Frames are reconstructible by replaying the recorded actions.
            let mut replay_env = CatchEnv::reset(&mut substream(1000, "c1-env", i));
            let mut frames = Vec::new();
            for s in &trace.steps {
                frames.push(replay_env.observation());
                replay_env.step(s.action).unwrap();
            }
            (trace, frames, None)
        } else {
            let side = rng.gen_range(6..12);
            let image = Image::from_vec(
                side,
                side,
                (0..side * side).map(|_| rng.gen_range(0.0..1.0)).collect(),
            );
            let label = rng.gen_range(0..10);
            let mut env = ClassificationEnv::new(image.clone(), label, 10, 3);
            let trace = rollout_episode(&mut model, &mut env, &mut rng, RolloutMode::Train, i)
                .unwrap();
            (trace, vec![image; 3], Some(label))
        };

        // Accumulate analytic gradients for the combined objective.
        accumulate_batch_gradients(&mut model, &[(trace.clone(), label)], label.is_some())
            .unwrap();

        let replay = EpisodeReplay::from_trace(&trace, frames, label, 1).unwrap();
        // Policy + supervised terms against every non-baseline parameter,
        // at the same head-signal scale the training path resolves.
        let policy_scale = 1.0 / model.cfg.core_dim as f64;
        let report = check_gradients_subset(
            &mut model,
            |m| m.clone().replay_policy_loss(&replay, policy_scale).unwrap(),
            1e-6,
            1e-4,
            |name| !name.starts_with("head.baseline"),
        );
        assert!(
            report.passed(),
            "instance {i}: policy-loss gradcheck failed, worst {:?}",
            report.worst
        );
        worst = worst.max(report.max_rel_err);

        // Baseline regression against its own (detached-input) loss.
        let scale = 1.0 / model.cfg.core_dim as f64;
        let report = check_gradients_subset(
            &mut model,
            |m| m.clone().replay_baseline_loss(&replay, scale).unwrap(),
            1e-6,
            1e-4,
            |name| name.starts_with("head.baseline"),
        );
        assert!(
            report.passed(),
            "instance {i}: baseline-loss gradcheck failed, worst {:?}",
            report.worst
        );
        worst = worst.max(report.max_rel_err);
    }

    // Elementwise op spot-checks live in the unit suites; assert the one
    // closed-form value here as a canary.
    let (logp, dmean) = gaussian_logprob([0.3, -0.4], [0.3, -0.4], 1.0).unwrap();
    assert!((logp + std::f64::consts::TAU.ln()).abs() < 1e-9);
    assert_eq!(dmean, [0.0, 0.0]);

    println!("PASS criterion 1: {instances} unrolled models checked, max rel err {worst:.2e} (tol 1e-4)");
}

// ---------------------------------------------------------------------------
// Criterion 2: sensor equals a brute-force per-pixel oracle, bit for bit.

/// Independent reference sensor, written straight from the definitions.
fn oracle_glimpse(image: &Image, l: GlimpseLocation, cfg: &RetinaConfig) -> Vec<f64> {
    let cx = ((l.x.clamp(-1.0, 1.0) + 1.0) / 2.0 * (image.width() as f64 - 1.0)).round() as i64;
    let cy = ((l.y.clamp(-1.0, 1.0) + 1.0) / 2.0 * (image.height() as f64 - 1.0)).round() as i64;
    let mut out = Vec::new();
    for s in 0..cfg.num_scales {
        let factor = 1i64 << s;
        let side = (cfg.patch_width as i64) << s;
        let x0 = cx - side / 2;
        let y0 = cy - side / 2;
        for oy in 0..cfg.patch_width as i64 {
            for ox in 0..cfg.patch_width as i64 {
                let mut sum = 0.0;
                for by in 0..factor {
                    for bx in 0..factor {
                        let sx = x0 + ox * factor + bx;
                        let sy = y0 + oy * factor + by;
                        sum += image.get_or_zero(sx, sy);
                    }
                }
                out.push(sum / (factor * factor) as f64);
            }
        }
    }
    out
}

#[test]
fn criterion_2_sensor_oracle_equivalence() {
    let mut rng = substream(2000, "c2", 0);
    let mut boundary_cases = 0;
    for _ in 0..1000 {
        let w = rng.gen_range(6..80);
        let h = rng.gen_range(6..80);
        let image = Image::from_vec(w, h, (0..w * h).map(|_| rng.gen_range(0.0..1.0)).collect());
        let cfg = RetinaConfig::new(rng.gen_range(1..9), rng.gen_range(1..4)).unwrap();
        // Bias a third of the draws to the borders so padding is exercised.
        let (x, y) = if rng.gen_bool(0.33) {
            boundary_cases += 1;
            (
                *[-1.0, -0.98, 0.98, 1.0].get(rng.gen_range(0..4)).unwrap(),
                rng.gen_range(-1.0..1.0),
            )
        } else {
            (rng.gen_range(-1.2..1.2), rng.gen_range(-1.2..1.2))
        };
        let l = GlimpseLocation::new(x, y);
        let got = build_glimpse(&image, l, &cfg);
        let want = oracle_glimpse(&image, l, &cfg);
        assert_eq!(got, want, "sensor mismatch at l=({x},{y}), cfg={cfg:?}");
    }
    println!("PASS criterion 2: 1000 random triples bit-equal ({boundary_cases} boundary-straddling)");
}

// ---------------------------------------------------------------------------
// Criterion 3: the score-function estimator against quadrature, and
// baseline variance reduction.

fn bandit_reward(a: [f64; 2]) -> f64 {
    let rx = (-(a[0] - 0.7) * (a[0] - 0.7) / 0.8).exp();
    let ry = 1.0 / (1.0 + (-2.0 * a[1]).exp());
    rx * ry
}

fn gauss_expect(f: impl Fn(f64) -> f64, mu: f64, sigma: f64) -> f64 {
    let n = 40_000usize;
    let lo = mu - 10.0 * sigma;
    let hi = mu + 10.0 * sigma;
    let h = (hi - lo) / n as f64;
    let density = |x: f64| {
        let z = (x - mu) / sigma;
        (-0.5 * z * z).exp() / (sigma * std::f64::consts::TAU.sqrt())
    };
    let mut sum = 0.0;
    for i in 0..=n {
        let x = lo + i as f64 * h;
        let w = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        sum += w * f(x) * density(x);
    }
    sum * h / 3.0
}

#[test]
fn criterion_3_reinforce_estimator() {
    let mean = [0.2, -0.1];
    let sigma = 0.5;
    let n = 100_000usize;

    // Exact gradient by numerical integration over the action density.
    let rx = |x: f64| (-(x - 0.7) * (x - 0.7) / 0.8).exp();
    let ry = |y: f64| 1.0 / (1.0 + (-2.0 * y).exp());
    let ix = gauss_expect(rx, mean[0], sigma);
    let iy = gauss_expect(ry, mean[1], sigma);
    let dix = gauss_expect(|x| rx(x) * (x - mean[0]) / (sigma * sigma), mean[0], sigma);
    let diy = gauss_expect(|y| ry(y) * (y - mean[1]) / (sigma * sigma), mean[1], sigma);
    let exact = [dix * iy, ix * diy];

    // Baseline fit by squared-error minimization on an independent sample
    // (the minimizer is the sample mean).
    let baseline = {
        let mut rng = substream(3000, "c3-fit", 0);
        let mut sum = 0.0;
        for _ in 0..10_000 {
            let a = [
                mean[0] + sigma * standard_normal(&mut rng),
                mean[1] + sigma * standard_normal(&mut rng),
            ];
            sum += bandit_reward(a);
        }
        sum / 10_000.0
    };

    let mut rng = substream(3000, "c3", 0);
    let mut sum_u = [0.0f64; 2];
    let mut sumsq_u = [0.0f64; 2];
    let mut sum_v = [0.0f64; 2];
    let mut sumsq_v = [0.0f64; 2];
    let mut sum_d = [0.0f64; 2];
    let mut sumsq_d = [0.0f64; 2];
    for _ in 0..n {
        let a = [
            mean[0] + sigma * standard_normal(&mut rng),
            mean[1] + sigma * standard_normal(&mut rng),
        ];
        let r = bandit_reward(a);
        let (_, dlogp) = gaussian_logprob(a, mean, sigma).unwrap();
        for d in 0..2 {
            let u = r * dlogp[d];
            let v = (r - baseline) * dlogp[d];
            sum_u[d] += u;
            sumsq_u[d] += u * u;
            sum_v[d] += v;
            sumsq_v[d] += v * v;
            let diff = u * u - v * v;
            sum_d[d] += diff;
            sumsq_d[d] += diff * diff;
        }
    }

    let nf = n as f64;
    for d in 0..2 {
        let mean_u = sum_u[d] / nf;
        let var_u = sumsq_u[d] / nf - mean_u * mean_u;
        let se_u = (var_u / nf).sqrt();
        assert!(
            (mean_u - exact[d]).abs() < 3.0 * se_u,
            "coord {d}: plain estimate {mean_u} vs exact {} (3se = {})",
            exact[d],
            3.0 * se_u
        );

        let mean_v = sum_v[d] / nf;
        let var_v = sumsq_v[d] / nf - mean_v * mean_v;
        let se_v = (var_v / nf).sqrt();
        assert!(
            (mean_v - exact[d]).abs() < 3.0 * se_v,
            "coord {d}: baselined estimate {mean_v} vs exact {} (3se = {})",
            exact[d],
            3.0 * se_v
        );

        // Unbiasedness: the two estimators agree within joint error bars at
        // 99% (z = 2.576).
        let joint = (se_u * se_u + se_v * se_v).sqrt();
        assert!(
            (mean_u - mean_v).abs() < 2.576 * joint,
            "coord {d}: baseline changed the estimate beyond noise"
        );

        // Variance strictly decreases: one-sided paired test at 99%.
        // E[u^2 - v^2] = Var(u) - Var(v) since both share the mean.
        let mean_d = sum_d[d] / nf;
        let var_d = sumsq_d[d] / nf - mean_d * mean_d;
        let z = mean_d / (var_d / nf).sqrt();
        assert!(
            z > 2.326,
            "coord {d}: variance reduction not significant (z = {z:.2})"
        );
        println!(
            "  coord {d}: exact {:+.5}, plain {:+.5} (var {:.4}), baselined {:+.5} (var {:.4}), z_var = {z:.1}",
            exact[d], mean_u, var_u, mean_v, var_v
        );
    }
    println!("PASS criterion 3: estimator matches quadrature within 3 SE; baseline cuts variance (99% one-sided)");
}

// ---------------------------------------------------------------------------
// Criterion 4: centered digits reach 5% test error at desk scale.

#[test]
#[ignore = "training run (tens of minutes); cargo test --test acceptance -- --include-ignored"]
fn criterion_4_centered_mnist() {
    let task = load_task(TaskSpec::centered());
    let retina = RetinaConfig::new(8, 1).unwrap();
    let cfg = C4_TRAIN;
    let model_cfg = RamConfig::classification(retina, 6, cfg.sigma);
    let mut model = RamModel::new(model_cfg, &mut substream(cfg.seed, "init", 0)).unwrap();

    let mut best = f64::INFINITY;
    for epoch in 0..cfg.epochs {
        let m = train_epoch_classification(&mut model, &task, &cfg, epoch).unwrap();
        let report = evaluate_error(&mut model, &task, Split::Test, 999, None).unwrap();
        best = best.min(report.error_rate);
        println!(
            "  epoch {epoch}: train_error {:.4}, val_error {:.4}, test_error {:.4}",
            m.train_error, m.val_error, report.error_rate
        );
        if report.error_rate <= C4_TARGET_ERROR {
            println!(
                "PASS criterion 4: test error {:.4} <= {:.2} at epoch {epoch} (long-run reference 0.0129)",
                report.error_rate, C4_TARGET_ERROR
            );
            return;
        }
    }
    panic!("criterion 4 FAILED: best test error {best:.4} > {C4_TARGET_ERROR} after {C4_MAX_EPOCHS} epochs");
}

// ---------------------------------------------------------------------------
// Criterion 5: more glimpses help (1 -> 2 -> 4 non-increasing, 6 beats 2).

#[test]
#[ignore = "training run (hours); cargo test --test acceptance -- --include-ignored"]
fn criterion_5_glimpse_count_monotonicity() {
    let task = load_task(TaskSpec::centered());
    let retina = RetinaConfig::new(8, 1).unwrap();
    let glimpse_counts = [1usize, 2, 4, 6];
    let mut means = Vec::new();
    for &glimpses in &glimpse_counts {
        let mut errors = Vec::new();
        for &seed in &C5_SEEDS {
            let cfg = TrainConfig {
                seed,
                epochs: C5_EPOCHS,
                ..C4_TRAIN
            };
            let model_cfg = RamConfig::classification(retina, glimpses, cfg.sigma);
            let mut model = RamModel::new(model_cfg, &mut substream(seed, "init", 0)).unwrap();
            for epoch in 0..cfg.epochs {
                train_epoch_classification(&mut model, &task, &cfg, epoch).unwrap();
            }
            let report = evaluate_error(&mut model, &task, Split::Test, 999, None).unwrap();
            errors.push(report.error_rate);
            println!("  {glimpses} glimpses, seed {seed}: test error {:.4}", report.error_rate);
        }
        let mean = errors.iter().sum::<f64>() / errors.len() as f64;
        println!("  {glimpses} glimpses: mean test error {mean:.4}");
        means.push(mean);
    }
    assert!(
        means[0] >= means[1] && means[1] >= means[2],
        "criterion 5 FAILED: not non-increasing over 1 -> 2 -> 4: {means:?}"
    );
    assert!(
        means[3] < means[1],
        "criterion 5 FAILED: 6 glimpses ({:.4}) does not beat 2 ({:.4})",
        means[3],
        means[1]
    );
    println!(
        "PASS criterion 5: mean errors {:?} non-increasing 1->2->4 and 6 < 2 over {} seeds",
        means,
        C5_SEEDS.len()
    );
}

// ---------------------------------------------------------------------------
// Criteria 6 and 7: orderings against the feedforward baselines.

fn train_ram_classification(
    task: &Task,
    retina: RetinaConfig,
    glimpses: usize,
    cfg: &TrainConfig,
) -> f64 {
    let model_cfg = RamConfig::classification(retina, glimpses, cfg.sigma);
    let mut model = RamModel::new(model_cfg, &mut substream(cfg.seed, "init", 0)).unwrap();
    for epoch in 0..cfg.epochs {
        train_epoch_classification(&mut model, task, cfg, epoch).unwrap();
    }
    evaluate_error(&mut model, task, Split::Test, 999, None)
        .unwrap()
        .error_rate
}

fn train_fc2(task: &Task, hidden: usize, cfg: &TrainConfig) -> f64 {
    let mut model = Fc2Model::new(task.canvas(), hidden, 10, &mut substream(cfg.seed, "init", 1));
    for epoch in 0..cfg.epochs {
        train_epoch_supervised(&mut model, task, cfg, epoch).unwrap();
    }
    let mut boxed: Box<dyn ram::baselines::FeedForwardClassifier> = Box::new(model);
    evaluate_error(&mut boxed, task, Split::Test, 999, None)
        .unwrap()
        .error_rate
}

fn train_conv2(task: &Task, cfg: &TrainConfig) -> f64 {
    let mut model = Conv2Model::new(task.canvas(), 10, &mut substream(cfg.seed, "init", 2));
    for epoch in 0..cfg.epochs {
        train_epoch_supervised(&mut model, task, cfg, epoch).unwrap();
    }
    let mut boxed: Box<dyn ram::baselines::FeedForwardClassifier> = Box::new(model);
    evaluate_error(&mut boxed, task, Split::Test, 999, None)
        .unwrap()
        .error_rate
}

/// Supervised baselines train with a plain stable recipe at the same budget.
fn baseline_train_cfg(seed: u64) -> TrainConfig {
    TrainConfig {
        learning_rate: 0.01,
        momentum: 0.9,
        batch_size: 32,
        epochs: C67_EPOCHS,
        sigma: 0.25,
        seed,
        examples_per_epoch: C67_EXAMPLES_PER_EPOCH,
        val_examples: 2000,
        workers: 2,
        baseline_scale: 0.0,
        grad_clip: 10.0,
        loc_path_scale: 0.0,
        policy_scale: 0.0,
    }
}

#[test]
#[ignore = "training run (hours); cargo test --test acceptance -- --include-ignored"]
fn criterion_6_translated_ordering() {
    let task = load_task(TaskSpec::translated(60));
    let retina = RetinaConfig::new(12, 3).unwrap();
    let mut wins = 0;
    for &seed in &C67_SEEDS {
        let ram_cfg = TrainConfig {
            seed,
            epochs: C67_EPOCHS,
            examples_per_epoch: C67_EXAMPLES_PER_EPOCH,
            ..C4_TRAIN
        };
        let ram_err = train_ram_classification(&task, retina, 6, &ram_cfg);
        let fc2_err = train_fc2(&task, 64, &baseline_train_cfg(seed));
        println!("  seed {seed}: ram {:.4} vs fc2-64 {:.4}", ram_err, fc2_err);
        if ram_err < fc2_err {
            wins += 1;
        }
    }
    assert_eq!(
        wins, 3,
        "criterion 6 FAILED: attention model must beat fc2-64 on 3/3 seeds (won {wins})"
    );
    println!("PASS criterion 6: attention model beat fc2-64 on 3/3 seeds (references 0.0186 vs 0.0756)");
}

#[test]
#[ignore = "training run (hours); cargo test --test acceptance -- --include-ignored"]
fn criterion_7_cluttered_ordering() {
    let task = load_task(TaskSpec::cluttered(60, 4));
    let retina = RetinaConfig::new(12, 3).unwrap();
    let mut wins = 0;
    for &seed in &C67_SEEDS {
        let ram_cfg = TrainConfig {
            seed,
            epochs: C67_EPOCHS,
            examples_per_epoch: C67_EXAMPLES_PER_EPOCH,
            ..C4_TRAIN
        };
        let ram_err = train_ram_classification(&task, retina, 6, &ram_cfg);
        let fc64_err = train_fc2(&task, 64, &baseline_train_cfg(seed));
        let fc256_err = train_fc2(&task, 256, &baseline_train_cfg(seed ^ 0x99));
        let conv_err = train_conv2(&task, &baseline_train_cfg(seed ^ 0xaa));
        let n = task.test_len();
        let (lo, hi) = wilson_interval((ram_err * n as f64).round() as usize, n);
        println!(
            "  seed {seed}: ram {:.4} (95% CI {:.4}..{:.4}) vs fc2-64 {:.4}, fc2-256 {:.4}, conv2 {:.4}",
            ram_err, lo, hi, fc64_err, fc256_err, conv_err
        );
        if ram_err < fc64_err && ram_err < fc256_err && ram_err < conv_err {
            wins += 1;
        }
    }
    assert!(
        wins >= 2,
        "criterion 7 FAILED: attention model must beat all baselines on >=2/3 seeds (won {wins})"
    );
    println!("PASS criterion 7: attention model beat fc2-64/fc2-256/conv2 on {wins}/3 seeds (references 0.0588 vs 0.0783 conv)");
}

// ---------------------------------------------------------------------------
// Criterion 8: capacity and per-glimpse compute do not grow with the image.

#[test]
fn criterion_8_bandwidth_limit() {
    let retina = RetinaConfig::new(12, 3).unwrap();
    let cfg = RamConfig::classification(retina, 6, 0.25);
    // The model never sees the canvas size; build two instances "for" the
    // 60x60 and 100x100 tasks and compare.
    let model_60 = RamModel::new(cfg, &mut substream(8000, "c8", 0)).unwrap();
    let model_100 = RamModel::new(cfg, &mut substream(8000, "c8", 1)).unwrap();
    assert_eq!(model_60.param_count(), model_100.param_count());
    assert_eq!(
        model_60.per_glimpse_multiplies(),
        model_100.per_glimpse_multiplies()
    );

    let mut rng = substream(8000, "c8", 2);
    let conv_60 = Conv2Model::new(60, 10, &mut rng);
    let conv_100 = Conv2Model::new(100, 10, &mut rng);
    assert!(conv_100.fc_fan_in() > conv_60.fc_fan_in());
    assert_eq!(conv_60.fc_fan_in(), 8 * 11 * 11);
    assert_eq!(conv_100.fc_fan_in(), 8 * 19 * 19);

    // Same-capacity claim across the compared models on the 60x60 task.
    let fc2 = Fc2Model::new(60, 64, 10, &mut rng);
    let counts = [
        model_60.param_count(),
        conv_60.param_count(),
        fc2.param_count(),
    ];
    let max = *counts.iter().max().unwrap() as f64;
    let min = *counts.iter().min().unwrap() as f64;
    assert!(
        max / min < 1.25,
        "parameter counts {counts:?} spread beyond 25%"
    );

    println!(
        "PASS criterion 8: attention model fixed at {} params / {} multiplies per glimpse for 60x60 and 100x100; conv2 fan-in grows {} -> {}; counts {counts:?} within 25%",
        model_60.param_count(),
        model_60.per_glimpse_multiplies(),
        conv_60.fc_fan_in(),
        conv_100.fc_fan_in()
    );
}

// ---------------------------------------------------------------------------
// Criterion 9: Catch solvability oracle, and the trained agent clearing the
// random-policy floor.

#[test]
fn criterion_9a_catch_solvability() {
    let episodes = 10_000;
    let rate = tracker_catch_rate(episodes, 9100);
    assert_eq!(
        rate, 1.0,
        "criterion 9a FAILED: tracker missed drops (rate {rate})"
    );
    println!("PASS criterion 9a: landing-column tracker caught {episodes}/{episodes} seeded drops");
}

#[test]
#[ignore = "training run (about an hour); cargo test --test acceptance -- --include-ignored"]
fn criterion_9b_catch_learning() {
    let episodes = 2_000;
    let random_rate = random_policy_catch_rate(10_000, 9200);

    let cfg = C9_TRAIN;
    let model_cfg = RamConfig::catch(23, cfg.sigma);
    let mut model = RamModel::new(model_cfg, &mut substream(cfg.seed, "init", 0)).unwrap();
    for epoch in 0..cfg.epochs {
        let m = train_epoch_catch(&mut model, &cfg, epoch, cfg.examples_per_epoch).unwrap();
        println!(
            "  epoch {epoch}: train catch rate {:.3}, val catch rate {:.3}",
            1.0 - m.train_error,
            1.0 - m.val_error
        );
    }

    let report = eval_catch_rate(&mut model, episodes, 9300).unwrap();
    let catch_rate = 1.0 - report.error_rate;
    let caught = (catch_rate * episodes as f64).round() as usize;
    let (lo, _hi) = wilson_interval(caught, episodes);
    println!(
        "  final: catch rate {:.4} over {episodes} episodes (95% CI lower bound {:.4}); random policy {:.4}",
        catch_rate, lo, random_rate
    );
    assert!(
        catch_rate >= 3.0 * random_rate,
        "criterion 9b FAILED: catch rate {catch_rate:.4} < 3x random baseline {random_rate:.4}"
    );
    assert!(
        lo > random_rate,
        "criterion 9b FAILED: Wilson interval does not exclude the random rate"
    );
    println!(
        "PASS criterion 9b: learned catch rate {:.4} >= 3x random {:.4}, CI excludes random (long-run reference 0.85)",
        catch_rate, random_rate
    );
}

// ---------------------------------------------------------------------------
// Criterion 10: rendered reconstruction panels equal the sensor oracle.

#[test]
fn criterion_10_rendering_matches_sensor() {
    let mut rng = substream(10_000, "c10", 0);
    let side = 36;
    let image = Image::from_vec(
        side,
        side,
        (0..side * side).map(|_| rng.gen_range(0.0..1.0)).collect(),
    );
    let retina = RetinaConfig::new(4, 3).unwrap();
    let cfg = RamConfig {
        retina,
        glimpse_feature_dim: 4,
        glimpse_output_dim: 5,
        core_dim: 6,
        core_kind: CoreKind::RectifierRnn,
        num_glimpses: 5,
        location_sigma: 0.4,
        num_actions: 10,
        discount: 1.0,
    };
    let mut model = RamModel::new(cfg, &mut rng).unwrap();
    let mut env = ClassificationEnv::new(image.clone(), 3, 10, 5);
    let trace = rollout_episode(
        &mut model,
        &mut env,
        &mut substream(10_000, "c10-policy", 0),
        RolloutMode::EvalStochastic,
        0,
    )
    .unwrap();

    // Panel count: 1 + T.
    let figure = ram::viz::render_glimpse_path(&trace, &image, &retina, true);
    assert_eq!(figure.width(), (1 + 5) * side);
    assert_eq!(figure.height(), side);

    // Each reconstruction panel equals the oracle's upscaled values exactly
    // (compared in f64 before quantization).
    for step in &trace.steps {
        let recon = render_reconstruction(&image, step.sensed_loc, &retina);
        let oracle = oracle_upscale(&image, step.sensed_loc, &retina);
        assert_eq!(recon.data(), oracle.data(), "panel mismatch at t={}", step.t);
    }
    println!("PASS criterion 10: {} reconstruction panels bit-equal to the oracle; figure is 1+T panels", trace.steps.len());
}

/// Independent upscale: paint each scale's oracle block means over its
/// footprint, coarsest first.
fn oracle_upscale(image: &Image, loc: GlimpseLocation, cfg: &RetinaConfig) -> Image {
    let values = oracle_glimpse(image, loc, cfg);
    let cx = ((loc.x + 1.0) / 2.0 * (image.width() as f64 - 1.0)).round() as i64;
    let cy = ((loc.y + 1.0) / 2.0 * (image.height() as f64 - 1.0)).round() as i64;
    let gw = cfg.patch_width;
    let mut out = Image::zeros(image.width(), image.height());
    for s in (0..cfg.num_scales).rev() {
        let factor = 1i64 << s;
        let side = (gw as i64) << s;
        let x0 = cx - side / 2;
        let y0 = cy - side / 2;
        for py in 0..side {
            for px in 0..side {
                let sx = x0 + px;
                let sy = y0 + py;
                if sx < 0 || sy < 0 || sx >= image.width() as i64 || sy >= image.height() as i64 {
                    continue;
                }
                let v = values[s * gw * gw
                    + (py / factor) as usize * gw
                    + (px / factor) as usize];
                out.set(sx as usize, sy as usize, v);
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Criterion 11: bit-level reproducibility from a manifest.

#[test]
fn criterion_11_reproducibility() {
    let dir = std::env::temp_dir().join(format!("ram-c11-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg_path = dir.join("run.cfg");
    // A small but real single-worker training run.
    std::fs::write(
        &cfg_path,
        "[task]\nkind = catch\n[model]\nglimpses = 12\ncore_dim = 16\nglimpse_feature_dim = 8\nglimpse_output_dim = 12\n[train]\nepochs = 2\nbatch_size = 8\nexamples_per_epoch = 24\nseed = 77\nworkers = 1\nsigma = 0.3\n",
    )
    .unwrap();

    let run = |tag: &str, config: &std::path::Path| -> (Vec<u8>, String) {
        let out = dir.join(tag);
        let code = ram::cli::run(&[
            "train".into(),
            "--config".into(),
            config.to_str().unwrap().into(),
            "--out".into(),
            out.to_str().unwrap().into(),
        ]);
        assert_eq!(code, 0, "training run failed");
        let ckpt = std::fs::read(out.join("checkpoint.bin")).unwrap();
        let metrics = std::fs::read_to_string(out.join("metrics.csv")).unwrap();
        (ckpt, metrics)
    };

    let (ckpt_a, metrics_a) = run("a", &cfg_path);
    // The second run consumes the first run's manifest.
    let manifest = dir.join("a").join("manifest.txt");
    let (ckpt_b, metrics_b) = run("b", &manifest);

    assert_eq!(ckpt_a, ckpt_b, "checkpoints differ between identical runs");

    // Metrics rows are bit-identical except the wall-clock column, which
    // cannot be deterministic.
    let strip_wall = |text: &str| -> String {
        text.lines()
            .map(|l| l.rsplit_once(',').map(|(head, _)| head.to_string()).unwrap_or_default())
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip_wall(&metrics_a), strip_wall(&metrics_b));
    std::fs::remove_dir_all(&dir).ok();
    println!("PASS criterion 11: manifest-fed rerun is bit-identical (checkpoint exact; metrics exact minus wall clock)");
}
