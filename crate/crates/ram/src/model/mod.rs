//! The recurrent attention model: glimpse network, recurrent core
//! (rectifier RNN or LSTM), location head, action head, and baseline head.

pub mod replay;
pub mod rollout;

use rand::Rng;

use crate::diffcore::{Init, Linear, LstmCell, LstmState, ParamBlock, Parameterized, Rect};
use crate::error::{Error, Result};
use crate::glimpse::RetinaConfig;

pub use replay::EpisodeReplay;
pub use rollout::{rollout_episode, EpisodeTrace, RolloutMode, StepRecord};

/// Which recurrence the core uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoreKind {
    /// `h_t = Rect(Linear(h_{t-1}) + Linear(g_t))`; used for classification.
    RectifierRnn,
    /// LSTM units; used for the dynamic environment.
    Lstm,
}

/// Architecture and episode hyperparameters.
#[derive(Debug, Clone, Copy)]
pub struct RamConfig {
    pub retina: RetinaConfig,
    /// Width of the independent retina and location feature layers.
    pub glimpse_feature_dim: usize,
    /// Width of the combined glimpse representation `g`.
    pub glimpse_output_dim: usize,
    /// Width of the recurrent state `h`.
    pub core_dim: usize,
    pub core_kind: CoreKind,
    /// Number of glimpses per episode.
    pub num_glimpses: usize,
    /// Fixed standard deviation of the Gaussian location policy, in
    /// normalized coordinate units.
    pub location_sigma: f64,
    /// Discrete action outputs (10 classes; 3 game moves).
    pub num_actions: usize,
    /// Return discount factor in `(0, 1]`.
    pub discount: f64,
}

impl RamConfig {
    /// Classification defaults: feature widths 128/256, rectifier core of
    /// 256 units, 10 classes, undiscounted returns.
    pub fn classification(retina: RetinaConfig, num_glimpses: usize, location_sigma: f64) -> Self {
        RamConfig {
            retina,
            glimpse_feature_dim: 128,
            glimpse_output_dim: 256,
            core_dim: 256,
            core_kind: CoreKind::RectifierRnn,
            num_glimpses,
            location_sigma,
            num_actions: 10,
            discount: 1.0,
        }
    }

    /// Catch defaults: 6x6 retina at three scales, LSTM core of 256 units,
    /// three game actions.
    pub fn catch(num_glimpses: usize, location_sigma: f64) -> Self {
        RamConfig {
            retina: RetinaConfig {
                patch_width: 6,
                num_scales: 3,
            },
            glimpse_feature_dim: 128,
            glimpse_output_dim: 256,
            core_dim: 256,
            core_kind: CoreKind::Lstm,
            num_glimpses,
            location_sigma,
            num_actions: 3,
            discount: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.retina.patch_width < 1 || self.retina.num_scales < 1 {
            return Err(Error::Config("retina dimensions must be >= 1".into()));
        }
        if self.glimpse_feature_dim < 1
            || self.glimpse_output_dim < 1
            || self.core_dim < 1
            || self.num_actions < 1
        {
            return Err(Error::Config("model dimensions must be >= 1".into()));
        }
        if self.num_glimpses < 1 {
            return Err(Error::Config("num_glimpses must be >= 1".into()));
        }
        if self.location_sigma <= 0.0 {
            return Err(Error::Config(format!(
                "location_sigma must be positive, got {}",
                self.location_sigma
            )));
        }
        if !(self.discount > 0.0 && self.discount <= 1.0) {
            return Err(Error::Config(format!(
                "discount must lie in (0, 1], got {}",
                self.discount
            )));
        }
        Ok(())
    }
}

/// Two-path glimpse network:
/// `g = Rect(Linear(h_g) + Linear(h_l))` with
/// `h_g = Rect(Linear(rho))` and `h_l = Rect(Linear(l))`.
#[derive(Debug, Clone)]
struct GlimpseNet {
    lin_retina: Linear,
    rect_retina: Rect,
    lin_loc: Linear,
    rect_loc: Rect,
    lin_feat_g: Linear,
    lin_feat_l: Linear,
    rect_out: Rect,
}

impl GlimpseNet {
    fn new<R: Rng>(cfg: &RamConfig, rng: &mut R) -> Self {
        let retina_len = cfg.retina.glimpse_len();
        GlimpseNet {
            lin_retina: Linear::with_init("glimpse.retina", retina_len, cfg.glimpse_feature_dim, Init::He, rng),
            rect_retina: Rect::new(),
            lin_loc: Linear::new("glimpse.loc", 2, cfg.glimpse_feature_dim, rng),
            rect_loc: Rect::new(),
            lin_feat_g: Linear::with_init("glimpse.feat_g", cfg.glimpse_feature_dim, cfg.glimpse_output_dim, Init::He, rng),
            lin_feat_l: Linear::with_init("glimpse.feat_l", cfg.glimpse_feature_dim, cfg.glimpse_output_dim, Init::He, rng),
            rect_out: Rect::new(),
        }
    }

    fn forward(&mut self, rho: &[f64], loc: [f64; 2], train: bool) -> Result<Vec<f64>> {
        if train {
            let hg = self.rect_retina.forward(&self.lin_retina.forward(rho)?);
            let hl = self.rect_loc.forward(&self.lin_loc.forward(&loc)?);
            let mut sum = self.lin_feat_g.forward(&hg)?;
            for (s, v) in sum.iter_mut().zip(self.lin_feat_l.forward(&hl)?) {
                *s += v;
            }
            Ok(self.rect_out.forward(&sum))
        } else {
            let hg = self.rect_retina.infer(&self.lin_retina.infer(rho)?);
            let hl = self.rect_loc.infer(&self.lin_loc.infer(&loc)?);
            let mut sum = self.lin_feat_g.infer(&hg)?;
            for (s, v) in sum.iter_mut().zip(self.lin_feat_l.infer(&hl)?) {
                *s += v;
            }
            Ok(self.rect_out.infer(&sum))
        }
    }

    /// Backward for the most recent cached forward. Gradients with respect
    /// to the retina content and the fed-in location are discarded: pixels
    /// are data, and sampled locations are constants under REINFORCE.
    fn backward(&mut self, dg: &[f64]) -> Result<()> {
        let dsum = self.rect_out.backward(dg)?;
        let dhg = self.lin_feat_g.backward(&dsum)?;
        let dhl = self.lin_feat_l.backward(&dsum)?;
        let dpre_g = self.rect_retina.backward(&dhg)?;
        self.lin_retina.backward(&dpre_g)?;
        let dpre_l = self.rect_loc.backward(&dhl)?;
        self.lin_loc.backward(&dpre_l)?;
        Ok(())
    }

    fn clear_caches(&mut self) {
        self.lin_retina.clear_cache();
        self.rect_retina.clear_cache();
        self.lin_loc.clear_cache();
        self.rect_loc.clear_cache();
        self.lin_feat_g.clear_cache();
        self.lin_feat_l.clear_cache();
        self.rect_out.clear_cache();
    }
}

/// Recurrent state threaded through an episode; `cell` is unused by the
/// rectifier core.
#[derive(Debug, Clone)]
pub struct CoreState {
    pub hidden: Vec<f64>,
    pub cell: Vec<f64>,
}

impl CoreState {
    pub fn zeros(dim: usize) -> Self {
        CoreState {
            hidden: vec![0.0; dim],
            cell: vec![0.0; dim],
        }
    }
}

#[derive(Debug, Clone)]
enum Core {
    Rnn {
        lin_hidden: Linear,
        lin_input: Linear,
        rect: Rect,
    },
    Lstm(LstmCell),
}

impl Core {
    fn new<R: Rng>(cfg: &RamConfig, rng: &mut R) -> Self {
        match cfg.core_kind {
            CoreKind::RectifierRnn => Core::Rnn {
                // Recurrent matrix stays contractive; only the input path
                // gets the rectifier gain.
                lin_hidden: Linear::new("core.hidden", cfg.core_dim, cfg.core_dim, rng),
                lin_input: Linear::with_init("core.input", cfg.glimpse_output_dim, cfg.core_dim, Init::He, rng),
                rect: Rect::new(),
            },
            CoreKind::Lstm => Core::Lstm(LstmCell::new(
                "core.lstm",
                cfg.glimpse_output_dim,
                cfg.core_dim,
                rng,
            )),
        }
    }

    fn step(&mut self, g: &[f64], state: &CoreState, train: bool) -> Result<CoreState> {
        match self {
            Core::Rnn {
                lin_hidden,
                lin_input,
                rect,
            } => {
                let (mut pre, from_g) = if train {
                    (lin_hidden.forward(&state.hidden)?, lin_input.forward(g)?)
                } else {
                    (lin_hidden.infer(&state.hidden)?, lin_input.infer(g)?)
                };
                for (p, v) in pre.iter_mut().zip(from_g) {
                    *p += v;
                }
                let hidden = if train {
                    rect.forward(&pre)
                } else {
                    rect.infer(&pre)
                };
                Ok(CoreState {
                    hidden,
                    cell: Vec::new(),
                })
            }
            Core::Lstm(cell) => {
                let st = LstmState {
                    hidden: state.hidden.clone(),
                    cell: state.cell.clone(),
                };
                let out = if train {
                    cell.forward_step(g, &st)?
                } else {
                    cell.infer_step(g, &st)?
                };
                Ok(CoreState {
                    hidden: out.hidden,
                    cell: out.cell,
                })
            }
        }
    }

    /// Backward through the most recent cached step. `dh`/`dc` are gradients
    /// into this step's output state; returns `(dg, dh_prev, dc_prev)`.
    fn backward(&mut self, dh: &[f64], dc: &[f64]) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        match self {
            Core::Rnn {
                lin_hidden,
                lin_input,
                rect,
            } => {
                let dpre = rect.backward(dh)?;
                let dh_prev = lin_hidden.backward(&dpre)?;
                let dg = lin_input.backward(&dpre)?;
                Ok((dg, dh_prev, Vec::new()))
            }
            Core::Lstm(cell) => {
                let (dg, dh_prev, dc_prev) = cell.backward_step(dh, dc)?;
                Ok((dg, dh_prev, dc_prev))
            }
        }
    }

    fn clear_caches(&mut self) {
        match self {
            Core::Rnn {
                lin_hidden,
                lin_input,
                rect,
            } => {
                lin_hidden.clear_cache();
                lin_input.clear_cache();
                rect.clear_cache();
            }
            Core::Lstm(cell) => cell.clear_cache(),
        }
    }
}

/// Per-step gradients injected at the model's output heads when
/// backpropagating an episode; built by the learning module from a trace.
#[derive(Debug, Clone)]
pub struct EpisodeSignals {
    /// `dLoss/d mean_t` at the location head, one per step.
    pub loc_mean_grads: Vec<[f64; 2]>,
    /// `dLoss/d logits_t` at the action head; `None` at steps where the
    /// action head did not run.
    pub action_logit_grads: Vec<Option<Vec<f64>>>,
    /// `dLoss/d b_t` at the baseline head. The baseline input is treated as
    /// constant: no gradient flows from here into the core.
    pub baseline_grads: Vec<f64>,
    /// Multiplier on the location head's backward injection into the core.
    /// 1 backpropagates the score-function term in full; 0 detaches the
    /// location head from the representation (its own weights still train).
    pub loc_path_scale: f64,
}

#[derive(Debug, Clone)]
pub struct RamModel {
    pub cfg: RamConfig,
    glimpse_net: GlimpseNet,
    core: Core,
    loc_head: Linear,
    action_head: Linear,
    baseline_head: Linear,
    /// Squashed location means cached by training forwards, popped by the
    /// backward pass (stack discipline like every layer cache).
    loc_mean_cache: Vec<[f64; 2]>,
}

impl RamModel {
    pub fn new<R: Rng>(cfg: RamConfig, rng: &mut R) -> Result<Self> {
        cfg.validate()?;
        Ok(RamModel {
            glimpse_net: GlimpseNet::new(&cfg, rng),
            core: Core::new(&cfg, rng),
            loc_head: Linear::new("head.loc", cfg.core_dim, 2, rng),
            action_head: Linear::new("head.action", cfg.core_dim, cfg.num_actions, rng),
            baseline_head: Linear::with_init("head.baseline", cfg.core_dim, 1, Init::Zero, rng),
            loc_mean_cache: Vec::new(),
            cfg,
        })
    }

    pub fn initial_state(&self) -> CoreState {
        CoreState::zeros(self.cfg.core_dim)
    }

    /// Glimpse network forward: `(retina encoding, location) -> g_t`.
    pub fn glimpse_forward(&mut self, rho: &[f64], loc: [f64; 2], train: bool) -> Result<Vec<f64>> {
        self.glimpse_net.forward(rho, loc, train)
    }

    /// Core update `h_t = f_h(h_{t-1}, g_t)`.
    pub fn core_step(&mut self, g: &[f64], state: &CoreState, train: bool) -> Result<CoreState> {
        self.core.step(g, state, train)
    }

    /// Mean of the Gaussian location policy at `h_t`: `tanh(Linear(h_t))`,
    /// bounded inside the sensed square so the policy cannot drift into the
    /// clamp region and stall there.
    pub fn location_mean(&mut self, hidden: &[f64], train: bool) -> Result<[f64; 2]> {
        let v = if train {
            self.loc_head.forward(hidden)?
        } else {
            self.loc_head.infer(hidden)?
        };
        let mean = [v[0].tanh(), v[1].tanh()];
        if train {
            self.loc_mean_cache.push(mean);
        }
        Ok(mean)
    }

    /// Softmax action distribution at `h_t`.
    pub fn action_distribution(&mut self, hidden: &[f64], train: bool) -> Result<Vec<f64>> {
        let logits = if train {
            self.action_head.forward(hidden)?
        } else {
            self.action_head.infer(hidden)?
        };
        Ok(crate::diffcore::softmax(&logits))
    }

    /// Scalar return prediction at `h_t`.
    pub fn baseline_predict(&mut self, hidden: &[f64], train: bool) -> Result<f64> {
        let v = if train {
            self.baseline_head.forward(hidden)?
        } else {
            self.baseline_head.infer(hidden)?
        };
        Ok(v[0])
    }

    /// Backpropagates one episode whose forward pass ran with caching, in
    /// reverse step order, accumulating parameter gradients.
    pub fn backward_episode(&mut self, signals: &EpisodeSignals) -> Result<()> {
        let steps = signals.loc_mean_grads.len();
        if signals.action_logit_grads.len() != steps || signals.baseline_grads.len() != steps {
            return Err(Error::Dimension {
                op: "episode backward",
                expected: format!("{steps} steps in all signal vectors"),
                got: format!(
                    "{} action / {} baseline",
                    signals.action_logit_grads.len(),
                    signals.baseline_grads.len()
                ),
            });
        }
        let mut dh_next = vec![0.0; self.cfg.core_dim];
        let mut dc_next = vec![0.0; self.cfg.core_dim];
        for t in (0..steps).rev() {
            let mut dh = dh_next;
            if let Some(dlogits) = &signals.action_logit_grads[t] {
                for (a, b) in dh.iter_mut().zip(self.action_head.backward(dlogits)?) {
                    *a += b;
                }
            }
            let mean = self.loc_mean_cache.pop().ok_or_else(|| {
                Error::State("episode backward without cached location means".into())
            })?;
            let dpre = [
                signals.loc_mean_grads[t][0] * (1.0 - mean[0] * mean[0]),
                signals.loc_mean_grads[t][1] * (1.0 - mean[1] * mean[1]),
            ];
            for (a, b) in dh.iter_mut().zip(self.loc_head.backward(&dpre)?) {
                *a += signals.loc_path_scale * b;
            }
            // Stop-gradient: the baseline's input gradient is dropped so
            // value fitting cannot reshape the core representation.
            let _ = self.baseline_head.backward(&[signals.baseline_grads[t]])?;

            let dc = if dc_next.is_empty() {
                vec![0.0; self.cfg.core_dim]
            } else {
                dc_next
            };
            let (dg, dh_prev, dc_prev) = self.core.backward(&dh, &dc)?;
            self.glimpse_net.backward(&dg)?;
            dh_next = dh_prev;
            dc_next = dc_prev;
        }
        Ok(())
    }

    /// Drops any cached forward state (used when a rollout is abandoned
    /// without a backward pass).
    pub fn clear_caches(&mut self) {
        self.glimpse_net.clear_caches();
        self.core.clear_caches();
        self.loc_head.clear_cache();
        self.action_head.clear_cache();
        self.baseline_head.clear_cache();
        self.loc_mean_cache.clear();
    }

    /// Multiplications per glimpse step (matrix-vector products only).
    /// Depends only on the architecture, never on the input image size.
    pub fn per_glimpse_multiplies(&self) -> usize {
        let cfg = &self.cfg;
        let retina_len = cfg.retina.glimpse_len();
        let glimpse = retina_len * cfg.glimpse_feature_dim
            + 2 * cfg.glimpse_feature_dim
            + 2 * cfg.glimpse_feature_dim * cfg.glimpse_output_dim;
        let core = match cfg.core_kind {
            CoreKind::RectifierRnn => {
                cfg.core_dim * cfg.core_dim + cfg.glimpse_output_dim * cfg.core_dim
            }
            CoreKind::Lstm => {
                4 * cfg.core_dim * cfg.glimpse_output_dim + 4 * cfg.core_dim * cfg.core_dim
            }
        };
        let heads = cfg.core_dim * 2 + cfg.core_dim * cfg.num_actions + cfg.core_dim;
        glimpse + core + heads
    }
}

impl Parameterized for RamModel {
    fn visit_params(&self, f: &mut dyn FnMut(&ParamBlock)) {
        self.glimpse_net.lin_retina.visit_params(f);
        self.glimpse_net.lin_loc.visit_params(f);
        self.glimpse_net.lin_feat_g.visit_params(f);
        self.glimpse_net.lin_feat_l.visit_params(f);
        match &self.core {
            Core::Rnn {
                lin_hidden,
                lin_input,
                ..
            } => {
                lin_hidden.visit_params(f);
                lin_input.visit_params(f);
            }
            Core::Lstm(cell) => cell.visit_params(f),
        }
        self.loc_head.visit_params(f);
        self.action_head.visit_params(f);
        self.baseline_head.visit_params(f);
    }

    fn visit_params_mut(&mut self, f: &mut dyn FnMut(&mut ParamBlock)) {
        self.glimpse_net.lin_retina.visit_params_mut(f);
        self.glimpse_net.lin_loc.visit_params_mut(f);
        self.glimpse_net.lin_feat_g.visit_params_mut(f);
        self.glimpse_net.lin_feat_l.visit_params_mut(f);
        match &mut self.core {
            Core::Rnn {
                lin_hidden,
                lin_input,
                ..
            } => {
                lin_hidden.visit_params_mut(f);
                lin_input.visit_params_mut(f);
            }
            Core::Lstm(cell) => cell.visit_params_mut(f),
        }
        self.loc_head.visit_params_mut(f);
        self.action_head.visit_params_mut(f);
        self.baseline_head.visit_params_mut(f);
    }
}
