//! Rectifier nonlinearity, stable softmax, cross-entropy, and the Gaussian
//! log-density used by the location policy.

use crate::error::{Error, Result};

/// Elementwise rectifier `max(x, 0)` with the same cache-stack discipline as
/// `Linear`. The subgradient at exactly zero is taken as 0.
#[derive(Debug, Clone, Default)]
pub struct Rect {
    cache: Vec<Vec<f64>>,
}

impl Rect {
    pub fn new() -> Self {
        Rect { cache: Vec::new() }
    }

    pub fn forward(&mut self, x: &[f64]) -> Vec<f64> {
        self.cache.push(x.to_vec());
        rect(x)
    }

    pub fn infer(&self, x: &[f64]) -> Vec<f64> {
        rect(x)
    }

    pub fn backward(&mut self, dy: &[f64]) -> Result<Vec<f64>> {
        let x = self
            .cache
            .pop()
            .ok_or_else(|| Error::State("rectifier backward with no cached forward".into()))?;
        Ok(x.iter()
            .zip(dy)
            .map(|(&xi, &d)| if xi > 0.0 { d } else { 0.0 })
            .collect())
    }

    pub fn clear_cache(&mut self) {
        self.cache.clear();
    }

    pub fn cached_steps(&self) -> usize {
        self.cache.len()
    }
}

pub fn rect(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| v.max(0.0)).collect()
}

/// Numerically stable softmax: shifts by the max logit before exponentiating.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&l| (l - max).exp()).collect();
    let z: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / z).collect()
}

/// Negative log-likelihood of `target` under `probs`, together with the
/// gradient with respect to the *logits* that produced `probs`
/// (`probs - one_hot(target)`).
///
/// The probability is clamped below at 1e-12 before the log so a saturated
/// softmax cannot produce an infinite loss.
pub fn cross_entropy(probs: &[f64], target: usize) -> Result<(f64, Vec<f64>)> {
    if target >= probs.len() {
        return Err(Error::Data(format!(
            "class index {target} out of range for {} classes",
            probs.len()
        )));
    }
    let loss = -probs[target].max(1e-12).ln();
    let mut dlogits = probs.to_vec();
    dlogits[target] -= 1.0;
    Ok((loss, dlogits))
}

/// Log-density of `sample` under an isotropic 2-D Gaussian
/// `N(mean, sigma^2 I)`, and its gradient with respect to the mean,
/// `(sample - mean) / sigma^2`.
pub fn gaussian_logprob(sample: [f64; 2], mean: [f64; 2], sigma: f64) -> Result<(f64, [f64; 2])> {
    if sigma <= 0.0 {
        return Err(Error::Config(format!(
            "location policy sigma must be positive, got {sigma}"
        )));
    }
    let norm = (sigma * (std::f64::consts::TAU).sqrt()).ln();
    let inv_var = 1.0 / (sigma * sigma);
    let mut logp = 0.0;
    let mut dmean = [0.0; 2];
    for d in 0..2 {
        let diff = sample[d] - mean[d];
        logp += -0.5 * diff * diff * inv_var - norm;
        dmean[d] = diff * inv_var;
    }
    Ok((logp, dmean))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rect_matches_definition() {
        assert_eq!(rect(&[-1.0, 0.0, 2.0]), vec![0.0, 0.0, 2.0]);
        assert_eq!(rect(&[-3.0, -0.5]), vec![0.0, 0.0]);
    }

    #[test]
    fn rect_is_idempotent() {
        let x = vec![-2.0, -0.1, 0.0, 0.3, 5.0];
        assert_eq!(rect(&rect(&x)), rect(&x));
    }

    #[test]
    fn rect_gradient_uses_indicator() {
        let mut r = Rect::new();
        r.forward(&[-1.0, 2.0]);
        assert_eq!(r.backward(&[5.0, 5.0]).unwrap(), vec![0.0, 5.0]);
    }

    #[test]
    fn rect_gradient_is_zero_at_exactly_zero() {
        let mut r = Rect::new();
        r.forward(&[0.0]);
        assert_eq!(r.backward(&[7.0]).unwrap(), vec![0.0]);
    }

    #[test]
    fn softmax_of_uniform_logits_is_uniform() {
        let p = softmax(&[4.2, 4.2, 4.2]);
        for v in &p {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn softmax_survives_huge_logits() {
        let p = softmax(&[1000.0, 0.0]);
        assert!(p[0] > 0.999_999);
        assert!(p.iter().all(|v| v.is_finite()));
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn softmax_matches_direct_formula() {
        let logits = [1.0, 2.0, 3.0];
        let p = softmax(&logits);
        let z: f64 = logits.iter().map(|l| l.exp()).sum();
        for (pi, l) in p.iter().zip(&logits) {
            assert!((pi - l.exp() / z).abs() < 1e-12);
        }
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn softmax_is_a_distribution_on_random_inputs() {
        use rand::Rng;
        let mut rng = crate::rng::substream(55, "softmax", 0);
        for _ in 0..200 {
            let n = rng.gen_range(1..12);
            let logits: Vec<f64> = (0..n).map(|_| rng.gen_range(-30.0..30.0)).collect();
            let p = softmax(&logits);
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(p.iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }

    #[test]
    fn cross_entropy_on_certain_prediction_is_zero() {
        let (loss, grad) = cross_entropy(&[0.0, 1.0, 0.0], 1).unwrap();
        assert!(loss.abs() < 1e-9);
        assert!((grad[1] - 0.0).abs() < 1e-9);
        assert_eq!(grad[0], 0.0);
    }

    #[test]
    fn cross_entropy_of_uniform_is_log_k() {
        for k in [2usize, 5, 10] {
            let probs = vec![1.0 / k as f64; k];
            let (loss, _) = cross_entropy(&probs, 0).unwrap();
            assert!((loss - (k as f64).ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn cross_entropy_rejects_out_of_range_target() {
        assert!(cross_entropy(&[0.5, 0.5], 2).is_err());
    }

    #[test]
    fn gaussian_logprob_at_mean_is_normalizer() {
        let (logp, dmean) = gaussian_logprob([0.3, -0.4], [0.3, -0.4], 1.0).unwrap();
        assert!((logp - -(std::f64::consts::TAU).ln()).abs() < 1e-9);
        assert_eq!(dmean, [0.0, 0.0]);
    }

    #[test]
    fn gaussian_logprob_matches_direct_formula() {
        let sigma = 0.25f64;
        let (logp, dmean) = gaussian_logprob([0.5, 0.0], [0.0, 0.0], sigma).unwrap();
        let expect = -0.5 * (0.5f64 / sigma).powi(2)
            - 2.0 * (sigma * std::f64::consts::TAU.sqrt()).ln();
        assert!((logp - expect).abs() < 1e-12, "{logp} vs {expect}");
        assert!((dmean[0] - 0.5 / (sigma * sigma)).abs() < 1e-12);
        assert_eq!(dmean[1], 0.0);
    }

    #[test]
    fn gaussian_logprob_rejects_nonpositive_sigma() {
        assert!(gaussian_logprob([0.0; 2], [0.0; 2], 0.0).is_err());
        assert!(gaussian_logprob([0.0; 2], [0.0; 2], -1.0).is_err());
    }
}
