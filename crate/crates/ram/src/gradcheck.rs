//! Central finite-difference gradient checking.
//!
//! The checker compares gradients already accumulated in a model's parameter
//! blocks against `(f(p + h) - f(p - h)) / 2h` computed from a caller-supplied
//! loss closure. The closure must be a pure forward evaluation (use the
//! layers' `infer` paths) so that probing does not disturb cached state.

use crate::diffcore::tensor::Parameterized;

#[derive(Debug, Clone)]
pub struct GradCheckReport {
    /// Number of coordinates compared.
    pub checked: usize,
    /// Number of coordinates exceeding the tolerance.
    pub failures: usize,
    /// Largest observed relative error.
    pub max_rel_err: f64,
    /// Block name and flat index of the worst coordinate, with its analytic
    /// and numeric values.
    pub worst: Option<(String, usize, f64, f64)>,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Scale-aware relative error: absolute for small gradients, relative for
/// large ones.
fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1.0)
}

/// Checks every parameter coordinate of `model` against central finite
/// differences of `loss`.
///
/// The model must already hold the analytic gradient of `loss` in its
/// `grad` tensors. Parameters are restored exactly after probing.
pub fn check_gradients<M: Parameterized>(
    model: &mut M,
    loss: impl FnMut(&M) -> f64,
    h: f64,
    tol: f64,
) -> GradCheckReport {
    check_gradients_subset(model, loss, h, tol, |_| true)
}

/// Like `check_gradients`, restricted to blocks whose name the filter
/// accepts. Needed when a loss only covers part of the parameter set (the
/// baseline head is fit to its own detached loss).
pub fn check_gradients_subset<M: Parameterized>(
    model: &mut M,
    mut loss: impl FnMut(&M) -> f64,
    h: f64,
    tol: f64,
    block_filter: impl Fn(&str) -> bool,
) -> GradCheckReport {
    // Snapshot analytic grads and block names up front.
    let mut analytic: Vec<(String, Vec<f64>)> = Vec::new();
    model.visit_params(&mut |b| {
        analytic.push((b.name().to_string(), b.grad.data().to_vec()));
    });

    let mut report = GradCheckReport {
        checked: 0,
        failures: 0,
        max_rel_err: 0.0,
        worst: None,
    };

    for (block_idx, (block_name, block_grads)) in analytic.iter().enumerate() {
        if !block_filter(block_name) {
            continue;
        }
        for coord in 0..block_grads.len() {
            let plus = {
                perturb(model, block_idx, coord, h);
                let v = loss(model);
                perturb(model, block_idx, coord, -h);
                v
            };
            let minus = {
                perturb(model, block_idx, coord, -h);
                let v = loss(model);
                perturb(model, block_idx, coord, h);
                v
            };
            let numeric = (plus - minus) / (2.0 * h);
            let a = block_grads[coord];
            let err = rel_err(a, numeric);
            report.checked += 1;
            if err > report.max_rel_err {
                report.max_rel_err = err;
                report.worst = Some((block_name.clone(), coord, a, numeric));
            }
            if err > tol {
                report.failures += 1;
            }
        }
    }
    report
}

fn perturb<M: Parameterized>(model: &mut M, block_idx: usize, coord: usize, delta: f64) {
    let mut i = 0;
    model.visit_params_mut(&mut |b| {
        if i == block_idx {
            b.value.data_mut()[coord] += delta;
        }
        i += 1;
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffcore::{cross_entropy, softmax, Linear, LstmCell, LstmState, Parameterized, Rect};
    use crate::rng::substream;
    use rand::Rng;

    /// affine -> rect -> affine -> softmax -> cross-entropy on random
    /// instances; the workhorse check for the dense layers.
    #[test]
    fn mlp_gradients_match_finite_differences() {
        let mut rng = substream(11, "gradcheck", 0);
        for trial in 0..50 {
            let in_dim = rng.gen_range(2..6);
            let hidden = rng.gen_range(2..6);
            let classes = rng.gen_range(2..5);
            let x: Vec<f64> = (0..in_dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let target = rng.gen_range(0..classes);

            struct Mlp {
                l1: Linear,
                r: Rect,
                l2: Linear,
            }
            impl Parameterized for Mlp {
                fn visit_params(&self, f: &mut dyn FnMut(&crate::diffcore::ParamBlock)) {
                    self.l1.visit_params(f);
                    self.l2.visit_params(f);
                }
                fn visit_params_mut(&mut self, f: &mut dyn FnMut(&mut crate::diffcore::ParamBlock)) {
                    self.l1.visit_params_mut(f);
                    self.l2.visit_params_mut(f);
                }
            }

            let mut mlp = Mlp {
                l1: Linear::new("l1", in_dim, hidden, &mut rng),
                r: Rect::new(),
                l2: Linear::new("l2", hidden, classes, &mut rng),
            };

            // Forward with caching, then backward.
            let h1 = mlp.l1.forward(&x).unwrap();
            let a1 = mlp.r.forward(&h1);
            let logits = mlp.l2.forward(&a1).unwrap();
            let probs = softmax(&logits);
            let (_, dlogits) = cross_entropy(&probs, target).unwrap();
            let da1 = mlp.l2.backward(&dlogits).unwrap();
            let dh1 = mlp.r.backward(&da1).unwrap();
            mlp.l1.backward(&dh1).unwrap();

            let report = check_gradients(
                &mut mlp,
                |m| {
                    let h1 = m.l1.infer(&x).unwrap();
                    let a1 = m.r.infer(&h1);
                    let logits = m.l2.infer(&a1).unwrap();
                    let probs = softmax(&logits);
                    cross_entropy(&probs, target).unwrap().0
                },
                1e-6,
                1e-5,
            );
            assert!(
                report.passed(),
                "trial {trial}: {} failures, worst {:?}",
                report.failures,
                report.worst
            );
        }
    }

    /// Multi-step LSTM unroll checked against finite differences, covering
    /// backpropagation through time.
    #[test]
    fn lstm_bptt_gradients_match_finite_differences() {
        let mut rng = substream(12, "gradcheck", 0);
        for trial in 0..10 {
            let in_dim = rng.gen_range(2..4);
            let hidden = rng.gen_range(2..4);
            let steps = 4;
            let xs: Vec<Vec<f64>> = (0..steps)
                .map(|_| (0..in_dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
                .collect();
            let target: Vec<f64> = (0..hidden).map(|_| rng.gen_range(-1.0..1.0)).collect();

            let mut cell = LstmCell::new("c", in_dim, hidden, &mut rng);

            // loss = 0.5 * || h_T - target ||^2 after `steps` steps.
            let mut state = LstmState::zeros(hidden);
            for x in &xs {
                state = cell.forward_step(x, &state).unwrap();
            }
            let mut dh: Vec<f64> = state.hidden.iter().zip(&target).map(|(h, t)| h - t).collect();
            let mut dc = vec![0.0; hidden];
            for _ in 0..steps {
                let (_, dh_prev, dc_prev) = cell.backward_step(&dh, &dc).unwrap();
                dh = dh_prev;
                dc = dc_prev;
            }

            let report = check_gradients(
                &mut cell,
                |c| {
                    let mut state = LstmState::zeros(hidden);
                    for x in &xs {
                        state = c.infer_step(x, &state).unwrap();
                    }
                    0.5 * state
                        .hidden
                        .iter()
                        .zip(&target)
                        .map(|(h, t)| (h - t) * (h - t))
                        .sum::<f64>()
                },
                1e-6,
                1e-4,
            );
            assert!(
                report.passed(),
                "trial {trial}: {} failures, worst {:?}",
                report.failures,
                report.worst
            );
        }
    }
}
