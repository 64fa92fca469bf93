//! Affine layer `y = W x + b` with cached-input backward.

use rand::Rng;

use crate::error::{Error, Result};

use super::tensor::{ParamBlock, Parameterized};

/// A fully connected affine transform.
///
/// `forward` pushes its input onto an internal cache stack; `backward` pops
/// the most recent one. Because backpropagation visits steps in reverse
/// order, the stack discipline makes the same layer instance reusable across
/// all timesteps of an unrolled episode.
#[derive(Debug, Clone)]
pub struct Linear {
    pub weight: ParamBlock,
    pub bias: ParamBlock,
    cache: Vec<Vec<f64>>,
}

/// Weight initialization for affine layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Init {
    /// Uniform `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`. Right for recurrent
    /// matrices (contractive) and readout heads.
    Plain,
    /// He bound `[-sqrt(6/fan_in), sqrt(6/fan_in)]`: preserves signal
    /// variance through rectifier layers, so deep rectifier stacks stay
    /// trainable.
    He,
    /// All zeros; value heads start from a zero estimate.
    Zero,
}

impl Linear {
    pub fn new<R: Rng>(name: &str, in_dim: usize, out_dim: usize, rng: &mut R) -> Self {
        Linear::with_init(name, in_dim, out_dim, Init::Plain, rng)
    }

    pub fn with_init<R: Rng>(
        name: &str,
        in_dim: usize,
        out_dim: usize,
        init: Init,
        rng: &mut R,
    ) -> Self {
        let weight = match init {
            Init::Plain => {
                ParamBlock::uniform_init(&format!("{name}.w"), out_dim, in_dim, in_dim, rng)
            }
            Init::He => {
                ParamBlock::he_uniform_init(&format!("{name}.w"), out_dim, in_dim, in_dim, rng)
            }
            Init::Zero => ParamBlock::zeros(&format!("{name}.w"), out_dim, in_dim),
        };
        let bias = match init {
            Init::Zero => ParamBlock::zeros(&format!("{name}.b"), out_dim, 1),
            _ => ParamBlock::uniform_init(&format!("{name}.b"), out_dim, 1, in_dim, rng),
        };
        Linear {
            weight,
            bias,
            cache: Vec::new(),
        }
    }

    pub fn in_dim(&self) -> usize {
        self.weight.value.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.weight.value.rows()
    }

    fn check_input(&self, op: &'static str, len: usize) -> Result<()> {
        if len != self.in_dim() {
            return Err(Error::Dimension {
                op,
                expected: format!("input of length {} (weight is {}x{})", self.in_dim(), self.out_dim(), self.in_dim()),
                got: format!("input of length {len}"),
            });
        }
        Ok(())
    }

    /// Forward pass that records the input for a later `backward`.
    pub fn forward(&mut self, x: &[f64]) -> Result<Vec<f64>> {
        let y = self.infer(x)?;
        self.cache.push(x.to_vec());
        Ok(y)
    }

    /// Forward pass without caching; for evaluation and numeric probes.
    pub fn infer(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input("affine forward", x.len())?;
        let mut y = vec![0.0; self.out_dim()];
        self.weight.value.matvec(x, &mut y);
        for (yi, b) in y.iter_mut().zip(self.bias.value.data()) {
            *yi += b;
        }
        Ok(y)
    }

    /// Accumulates the outer product `dW += dy x^T` and `db += dy` for the most recent cached
    /// forward, and returns `dx = W^T dy`.
    pub fn backward(&mut self, dy: &[f64]) -> Result<Vec<f64>> {
        if dy.len() != self.out_dim() {
            return Err(Error::Dimension {
                op: "affine backward",
                expected: format!("output gradient of length {}", self.out_dim()),
                got: format!("length {}", dy.len()),
            });
        }
        let x = self.cache.pop().ok_or_else(|| {
            Error::State(format!(
                "backward called on `{}` with no cached forward",
                self.weight.name()
            ))
        })?;
        self.weight.grad.add_outer(dy, &x);
        for (g, d) in self.bias.grad.data_mut().iter_mut().zip(dy) {
            *g += d;
        }
        let mut dx = vec![0.0; self.in_dim()];
        self.weight.value.matvec_transposed_acc(dy, &mut dx);
        Ok(dx)
    }

    pub fn cached_steps(&self) -> usize {
        self.cache.len()
    }

    pub fn clear_cache(&mut self) {
        self.cache.clear();
    }
}

impl Parameterized for Linear {
    fn visit_params(&self, f: &mut dyn FnMut(&ParamBlock)) {
        f(&self.weight);
        f(&self.bias);
    }

    fn visit_params_mut(&mut self, f: &mut dyn FnMut(&mut ParamBlock)) {
        f(&mut self.weight);
        f(&mut self.bias);
    }
}
