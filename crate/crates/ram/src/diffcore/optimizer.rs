//! Stochastic gradient descent with classical momentum.

use crate::error::{Error, Result};

use super::tensor::Parameterized;

/// SGD with momentum:
///
/// ```text
/// velocity <- momentum * velocity + grad
/// value    <- value - learning_rate * velocity
/// ```
///
/// Gradients are zeroed after a successful step. If any accumulated gradient
/// is non-finite the step aborts before touching any parameter, naming the
/// offending block.
#[derive(Debug, Clone, Copy)]
pub struct SgdMomentum {
    pub learning_rate: f64,
    pub momentum: f64,
}

impl SgdMomentum {
    pub fn new(learning_rate: f64, momentum: f64) -> Self {
        SgdMomentum {
            learning_rate,
            momentum,
        }
    }

    pub fn step(&self, model: &mut dyn Parameterized) -> Result<()> {
        let mut bad: Option<String> = None;
        model.visit_params(&mut |b| {
            if bad.is_none() && !b.grad.all_finite() {
                bad = Some(b.name().to_string());
            }
        });
        if let Some(block) = bad {
            return Err(Error::NonFinite { block });
        }
        let lr = self.learning_rate;
        let momentum = self.momentum;
        model.visit_params_mut(&mut |b| {
            let grads = b.grad.data_mut();
            let vel = b.velocity.data_mut();
            let vals = b.value.data_mut();
            for ((v, g), val) in vel.iter_mut().zip(grads.iter_mut()).zip(vals.iter_mut()) {
                *v = momentum * *v + *g;
                *val -= lr * *v;
                *g = 0.0;
            }
        });
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffcore::tensor::{ParamBlock, Parameterized};

    struct OneBlock(ParamBlock);

    impl Parameterized for OneBlock {
        fn visit_params(&self, f: &mut dyn FnMut(&ParamBlock)) {
            f(&self.0);
        }
        fn visit_params_mut(&mut self, f: &mut dyn FnMut(&mut ParamBlock)) {
            f(&mut self.0);
        }
    }

    fn block_with(value: f64, grad: f64, velocity: f64) -> OneBlock {
        let mut b = ParamBlock::zeros("p", 1, 1);
        b.value.set(0, 0, value);
        b.grad.set(0, 0, grad);
        b.velocity.set(0, 0, velocity);
        OneBlock(b)
    }

    #[test]
    fn zero_momentum_reduces_to_plain_sgd() {
        let mut m = block_with(1.0, 0.5, 0.0);
        SgdMomentum::new(0.1, 0.0).step(&mut m).unwrap();
        assert!((m.0.value.at(0, 0) - (1.0 - 0.1 * 0.5)).abs() < 1e-15);
        assert_eq!(m.0.grad.at(0, 0), 0.0);
    }

    #[test]
    fn coasting_on_velocity_with_zero_grad() {
        let mut m = block_with(2.0, 0.0, 1.0);
        SgdMomentum::new(0.1, 0.9).step(&mut m).unwrap();
        assert!((m.0.value.at(0, 0) - (2.0 - 0.1 * 0.9)).abs() < 1e-15);
    }

    #[test]
    fn two_steps_with_constant_grad_compound_velocity() {
        let mut m = block_with(0.0, 1.0, 0.0);
        let opt = SgdMomentum::new(0.1, 0.9);
        opt.step(&mut m).unwrap();
        m.0.grad.set(0, 0, 1.0);
        opt.step(&mut m).unwrap();
        // v1 = g, v2 = 0.9 g + g = g (1 + 0.9)
        assert!((m.0.velocity.at(0, 0) - 1.9).abs() < 1e-15);
        assert!((m.0.value.at(0, 0) - -(0.1 + 0.19)).abs() < 1e-15);
    }

    #[test]
    fn zero_grad_zero_velocity_is_identity() {
        let mut m = block_with(3.5, 0.0, 0.0);
        SgdMomentum::new(0.5, 0.9).step(&mut m).unwrap();
        assert_eq!(m.0.value.at(0, 0), 3.5);
    }

    #[test]
    fn non_finite_grad_aborts_naming_the_block() {
        let mut m = block_with(1.0, f64::NAN, 0.0);
        let err = SgdMomentum::new(0.1, 0.9).step(&mut m).unwrap_err();
        assert!(err.to_string().contains("`p`"), "{err}");
        // Parameter untouched by the aborted step.
        assert_eq!(m.0.value.at(0, 0), 1.0);
    }
}
