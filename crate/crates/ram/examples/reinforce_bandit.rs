//! Score-function gradient estimation on a two-dimensional Gaussian-policy
//! bandit whose exact gradient is computable by quadrature, demonstrating
//! that the Monte-Carlo estimator is unbiased and that a fitted baseline
//! shrinks its variance.

use ram::diffcore::gaussian_logprob;
use ram::rng::{standard_normal, substream};

/// Smooth, separable reward in (0, 1].
fn reward(a: [f64; 2]) -> f64 {
    let rx = (-(a[0] - 0.7) * (a[0] - 0.7) / 0.8).exp();
    let ry = 1.0 / (1.0 + (-2.0 * a[1]).exp());
    rx * ry
}

/// Simpson quadrature of `f` against the N(mu, sigma^2) density.
fn gauss_expect(f: impl Fn(f64) -> f64, mu: f64, sigma: f64) -> f64 {
    let n = 40_000usize; // even
    let lo = mu - 10.0 * sigma;
    let hi = mu + 10.0 * sigma;
    let h = (hi - lo) / n as f64;
    let density = |x: f64| {
        let z = (x - mu) / sigma;
        (-0.5 * z * z).exp() / (sigma * (std::f64::consts::TAU).sqrt())
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

fn main() {
    let mean = [0.2, -0.1];
    let sigma = 0.5;

    // Exact gradient of E[R] with respect to the mean, via the score
    // identity and the reward's separability.
    let rx = |x: f64| (-(x - 0.7) * (x - 0.7) / 0.8).exp();
    let ry = |y: f64| 1.0 / (1.0 + (-2.0 * y).exp());
    let ix = gauss_expect(rx, mean[0], sigma);
    let iy = gauss_expect(ry, mean[1], sigma);
    let dix = gauss_expect(|x| rx(x) * (x - mean[0]) / (sigma * sigma), mean[0], sigma);
    let diy = gauss_expect(|y| ry(y) * (y - mean[1]) / (sigma * sigma), mean[1], sigma);
    let exact = [dix * iy, ix * diy];
    println!("exact gradient (quadrature):   [{:+.6}, {:+.6}]", exact[0], exact[1]);

    // Monte-Carlo score-function estimates, with and without a baseline.
    let n = 100_000;
    let mut rng = substream(2024, "bandit", 0);
    let baseline = {
        let mut fit_rng = substream(2024, "bandit-baseline", 0);
        let mut sum = 0.0;
        for _ in 0..10_000 {
            let a = [
                mean[0] + sigma * standard_normal(&mut fit_rng),
                mean[1] + sigma * standard_normal(&mut fit_rng),
            ];
            sum += reward(a);
        }
        sum / 10_000.0
    };

    let mut plain_sum = [0.0f64; 2];
    let mut plain_sq = [0.0f64; 2];
    let mut based_sum = [0.0f64; 2];
    let mut based_sq = [0.0f64; 2];
    for _ in 0..n {
        let a = [
            mean[0] + sigma * standard_normal(&mut rng),
            mean[1] + sigma * standard_normal(&mut rng),
        ];
        let r = reward(a);
        let (_, dlogp) = gaussian_logprob(a, mean, sigma).unwrap();
        for d in 0..2 {
            let u = r * dlogp[d];
            let v = (r - baseline) * dlogp[d];
            plain_sum[d] += u;
            plain_sq[d] += u * u;
            based_sum[d] += v;
            based_sq[d] += v * v;
        }
    }
    let nf = n as f64;
    for d in 0..2 {
        let mean_u = plain_sum[d] / nf;
        let var_u = plain_sq[d] / nf - mean_u * mean_u;
        let mean_v = based_sum[d] / nf;
        let var_v = based_sq[d] / nf - mean_v * mean_v;
        println!(
            "coord {d}: plain estimate {:+.6} (se {:.6}) | with baseline {:+.6} (se {:.6}) | variance {:.4} -> {:.4}",
            mean_u,
            (var_u / nf).sqrt(),
            mean_v,
            (var_v / nf).sqrt(),
            var_u,
            var_v
        );
    }
    println!("baseline (fitted mean reward) = {baseline:.4}");
}
