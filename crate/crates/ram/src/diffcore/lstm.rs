//! LSTM cell with input, forget, and output gates and a tanh candidate,
//! without peephole connections.
//!
//! Gate pre-activations are computed as `W_x x + W_h h + b` with the four
//! gate rows packed into single matrices in the order
//! input / forget / output / candidate.

use rand::Rng;

use crate::error::{Error, Result};

use super::tensor::{ParamBlock, Parameterized};

/// Recurrent state: hidden and cell vectors of equal length.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmState {
    pub hidden: Vec<f64>,
    pub cell: Vec<f64>,
}

impl LstmState {
    pub fn zeros(hidden_dim: usize) -> Self {
        LstmState {
            hidden: vec![0.0; hidden_dim],
            cell: vec![0.0; hidden_dim],
        }
    }
}

#[derive(Debug, Clone)]
struct StepCache {
    x: Vec<f64>,
    h_prev: Vec<f64>,
    c_prev: Vec<f64>,
    gate_i: Vec<f64>,
    gate_f: Vec<f64>,
    gate_o: Vec<f64>,
    candidate: Vec<f64>,
    tanh_c_new: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LstmCell {
    /// `(4H x in_dim)` input weights, gates packed row-wise.
    pub w_input: ParamBlock,
    /// `(4H x H)` recurrent weights.
    pub w_hidden: ParamBlock,
    /// `(4H x 1)` biases.
    pub bias: ParamBlock,
    hidden_dim: usize,
    in_dim: usize,
    cache: Vec<StepCache>,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl LstmCell {
    pub fn new<R: Rng>(name: &str, in_dim: usize, hidden_dim: usize, rng: &mut R) -> Self {
        LstmCell {
            w_input: ParamBlock::uniform_init(
                &format!("{name}.wx"),
                4 * hidden_dim,
                in_dim,
                in_dim,
                rng,
            ),
            w_hidden: ParamBlock::uniform_init(
                &format!("{name}.wh"),
                4 * hidden_dim,
                hidden_dim,
                hidden_dim,
                rng,
            ),
            bias: ParamBlock::uniform_init(&format!("{name}.b"), 4 * hidden_dim, 1, hidden_dim, rng),
            hidden_dim,
            in_dim,
            cache: Vec::new(),
        }
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    fn check_shapes(&self, x: &[f64], state: &LstmState) -> Result<()> {
        if x.len() != self.in_dim || state.hidden.len() != self.hidden_dim || state.cell.len() != self.hidden_dim {
            return Err(Error::Dimension {
                op: "lstm step",
                expected: format!("input {} / state {}", self.in_dim, self.hidden_dim),
                got: format!(
                    "input {} / hidden {} / cell {}",
                    x.len(),
                    state.hidden.len(),
                    state.cell.len()
                ),
            });
        }
        Ok(())
    }

    fn gates(&self, x: &[f64], h_prev: &[f64]) -> Vec<f64> {
        let mut pre = vec![0.0; 4 * self.hidden_dim];
        self.w_input.value.matvec(x, &mut pre);
        let mut rec = vec![0.0; 4 * self.hidden_dim];
        self.w_hidden.value.matvec(h_prev, &mut rec);
        for ((p, r), b) in pre.iter_mut().zip(&rec).zip(self.bias.value.data()) {
            *p += r + b;
        }
        pre
    }

    /// One recurrent step, caching everything `backward_step` needs.
    pub fn forward_step(&mut self, x: &[f64], state: &LstmState) -> Result<LstmState> {
        self.check_shapes(x, state)?;
        let h = self.hidden_dim;
        let pre = self.gates(x, &state.hidden);
        let gate_i: Vec<f64> = pre[0..h].iter().map(|&v| sigmoid(v)).collect();
        let gate_f: Vec<f64> = pre[h..2 * h].iter().map(|&v| sigmoid(v)).collect();
        let gate_o: Vec<f64> = pre[2 * h..3 * h].iter().map(|&v| sigmoid(v)).collect();
        let candidate: Vec<f64> = pre[3 * h..4 * h].iter().map(|&v| v.tanh()).collect();

        let mut c_new = vec![0.0; h];
        for j in 0..h {
            c_new[j] = gate_f[j] * state.cell[j] + gate_i[j] * candidate[j];
        }
        let tanh_c_new: Vec<f64> = c_new.iter().map(|&v| v.tanh()).collect();
        let h_new: Vec<f64> = gate_o.iter().zip(&tanh_c_new).map(|(o, t)| o * t).collect();

        self.cache.push(StepCache {
            x: x.to_vec(),
            h_prev: state.hidden.clone(),
            c_prev: state.cell.clone(),
            gate_i,
            gate_f,
            gate_o,
            candidate,
            tanh_c_new,
        });
        Ok(LstmState {
            hidden: h_new,
            cell: c_new,
        })
    }

    /// Step without caching, for evaluation.
    pub fn infer_step(&self, x: &[f64], state: &LstmState) -> Result<LstmState> {
        self.check_shapes(x, state)?;
        let h = self.hidden_dim;
        let pre = self.gates(x, &state.hidden);
        let mut c_new = vec![0.0; h];
        let mut h_new = vec![0.0; h];
        for j in 0..h {
            let i = sigmoid(pre[j]);
            let f = sigmoid(pre[h + j]);
            let o = sigmoid(pre[2 * h + j]);
            let cand = pre[3 * h + j].tanh();
            c_new[j] = f * state.cell[j] + i * cand;
            h_new[j] = o * c_new[j].tanh();
        }
        Ok(LstmState {
            hidden: h_new,
            cell: c_new,
        })
    }

    /// Backward through the most recent cached step.
    ///
    /// `dh` and `dc` are the gradients flowing into this step's output hidden
    /// and cell state; returns `(dx, dh_prev, dc_prev)` and accumulates
    /// parameter gradients.
    pub fn backward_step(&mut self, dh: &[f64], dc: &[f64]) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let h = self.hidden_dim;
        if dh.len() != h || dc.len() != h {
            return Err(Error::Dimension {
                op: "lstm backward",
                expected: format!("gradients of length {h}"),
                got: format!("dh {} / dc {}", dh.len(), dc.len()),
            });
        }
        let cache = self
            .cache
            .pop()
            .ok_or_else(|| Error::State("lstm backward with no cached forward".into()))?;

        // dz packs pre-activation gradients in gate order i/f/o/candidate.
        let mut dz = vec![0.0; 4 * h];
        let mut dc_prev = vec![0.0; h];
        for j in 0..h {
            let d_out = dh[j] * cache.tanh_c_new[j];
            let dc_total = dc[j] + dh[j] * cache.gate_o[j] * (1.0 - cache.tanh_c_new[j] * cache.tanh_c_new[j]);
            let d_i = dc_total * cache.candidate[j];
            let d_f = dc_total * cache.c_prev[j];
            let d_cand = dc_total * cache.gate_i[j];
            dc_prev[j] = dc_total * cache.gate_f[j];

            dz[j] = d_i * cache.gate_i[j] * (1.0 - cache.gate_i[j]);
            dz[h + j] = d_f * cache.gate_f[j] * (1.0 - cache.gate_f[j]);
            dz[2 * h + j] = d_out * cache.gate_o[j] * (1.0 - cache.gate_o[j]);
            dz[3 * h + j] = d_cand * (1.0 - cache.candidate[j] * cache.candidate[j]);
        }

        self.w_input.grad.add_outer(&dz, &cache.x);
        self.w_hidden.grad.add_outer(&dz, &cache.h_prev);
        for (g, d) in self.bias.grad.data_mut().iter_mut().zip(&dz) {
            *g += d;
        }

        let mut dx = vec![0.0; self.in_dim];
        self.w_input.value.matvec_transposed_acc(&dz, &mut dx);
        let mut dh_prev = vec![0.0; h];
        self.w_hidden.value.matvec_transposed_acc(&dz, &mut dh_prev);
        Ok((dx, dh_prev, dc_prev))
    }

    pub fn cached_steps(&self) -> usize {
        self.cache.len()
    }

    pub fn clear_cache(&mut self) {
        self.cache.clear();
    }
}

impl Parameterized for LstmCell {
    fn visit_params(&self, f: &mut dyn FnMut(&ParamBlock)) {
        f(&self.w_input);
        f(&self.w_hidden);
        f(&self.bias);
    }

    fn visit_params_mut(&mut self, f: &mut dyn FnMut(&mut ParamBlock)) {
        f(&mut self.w_input);
        f(&mut self.w_hidden);
        f(&mut self.bias);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    #[test]
    fn zero_parameters_give_zero_hidden() {
        let mut rng = substream(1, "lstm", 0);
        let mut cell = LstmCell::new("c", 3, 4, &mut rng);
        cell.w_input.value.fill(0.0);
        cell.w_hidden.value.fill(0.0);
        cell.bias.value.fill(0.0);
        let out = cell
            .forward_step(&[1.0, -2.0, 3.0], &LstmState::zeros(4))
            .unwrap();
        // sigmoid(0) * tanh(0) = 0
        assert!(out.hidden.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn saturated_forget_gate_preserves_cell() {
        let mut rng = substream(2, "lstm", 0);
        let mut cell = LstmCell::new("c", 2, 2, &mut rng);
        cell.w_input.value.fill(0.0);
        cell.w_hidden.value.fill(0.0);
        cell.bias.value.fill(0.0);
        // Forget bias ~ +inf, input gate bias ~ -inf: cell carried unchanged.
        for j in 0..2 {
            cell.bias.value.set(j, 0, -100.0); // input gate shut
            cell.bias.value.set(2 + j, 0, 100.0); // forget gate open
        }
        let state = LstmState {
            hidden: vec![0.0, 0.0],
            cell: vec![0.7, -0.3],
        };
        let out = cell.infer_step(&[0.5, 0.5], &state).unwrap();
        assert!((out.cell[0] - 0.7).abs() < 1e-12);
        assert!((out.cell[1] + 0.3).abs() < 1e-12);
    }

    #[test]
    fn forward_and_infer_agree() {
        let mut rng = substream(3, "lstm", 0);
        let mut cell = LstmCell::new("c", 3, 5, &mut rng);
        let state = LstmState {
            hidden: (0..5).map(|i| 0.1 * i as f64).collect(),
            cell: (0..5).map(|i| -0.05 * i as f64).collect(),
        };
        let x = [0.2, -0.4, 0.6];
        let a = cell.forward_step(&x, &state).unwrap();
        let b = cell.infer_step(&x, &state).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let mut rng = substream(4, "lstm", 0);
        let mut cell = LstmCell::new("c", 3, 4, &mut rng);
        assert!(cell.forward_step(&[1.0], &LstmState::zeros(4)).is_err());
        assert!(cell.backward_step(&[0.0; 4], &[0.0; 3]).is_err());
    }
}
