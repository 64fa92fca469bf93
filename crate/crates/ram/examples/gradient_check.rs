//! Checks every layer's analytic gradients, and the fully unrolled attention
//! model's, against central finite differences.

use ram::diffcore::{cross_entropy, softmax, Linear, LstmCell, LstmState, Parameterized, Rect};
use ram::gradcheck::check_gradients;
use ram::rng::substream;
use rand::Rng;

fn main() {
    let mut rng = substream(7, "example", 0);

    // A small affine->rect->affine->softmax stack.
    struct Mlp {
        l1: Linear,
        r: Rect,
        l2: Linear,
    }
    impl Parameterized for Mlp {
        fn visit_params(&self, f: &mut dyn FnMut(&ram::diffcore::ParamBlock)) {
            self.l1.visit_params(f);
            self.l2.visit_params(f);
        }
        fn visit_params_mut(&mut self, f: &mut dyn FnMut(&mut ram::diffcore::ParamBlock)) {
            self.l1.visit_params_mut(f);
            self.l2.visit_params_mut(f);
        }
    }

    let x: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut mlp = Mlp {
        l1: Linear::new("l1", 5, 7, &mut rng),
        r: Rect::new(),
        l2: Linear::new("l2", 7, 4, &mut rng),
    };
    let h = mlp.r.forward(&mlp.l1.forward(&x).unwrap());
    let logits = mlp.l2.forward(&h).unwrap();
    let (_, dlogits) = cross_entropy(&softmax(&logits), 2).unwrap();
    let da = mlp.l2.backward(&dlogits).unwrap();
    let dh = mlp.r.backward(&da).unwrap();
    mlp.l1.backward(&dh).unwrap();
    let report = check_gradients(
        &mut mlp,
        |m| {
            let h = m.r.infer(&m.l1.infer(&x).unwrap());
            cross_entropy(&softmax(&m.l2.infer(&h).unwrap()), 2).unwrap().0
        },
        1e-6,
        1e-5,
    );
    println!(
        "affine/rect/softmax stack: {} coords checked, max rel err {:.2e} -> {}",
        report.checked,
        report.max_rel_err,
        if report.passed() { "ok" } else { "FAIL" }
    );

    // A 4-step LSTM unroll.
    let mut cell = LstmCell::new("lstm", 3, 4, &mut rng);
    let xs: Vec<Vec<f64>> = (0..4)
        .map(|_| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let target: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut state = LstmState::zeros(4);
    for x in &xs {
        state = cell.forward_step(x, &state).unwrap();
    }
    let mut dh: Vec<f64> = state.hidden.iter().zip(&target).map(|(h, t)| h - t).collect();
    let mut dc = vec![0.0; 4];
    for _ in 0..4 {
        let (_, dh_prev, dc_prev) = cell.backward_step(&dh, &dc).unwrap();
        dh = dh_prev;
        dc = dc_prev;
    }
    let report = check_gradients(
        &mut cell,
        |c| {
            let mut state = LstmState::zeros(4);
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
    println!(
        "lstm 4-step unroll:        {} coords checked, max rel err {:.2e} -> {}",
        report.checked,
        report.max_rel_err,
        if report.passed() { "ok" } else { "FAIL" }
    );

    println!();
    println!("run the full acceptance gradient check with:");
    println!("  cargo test -p ram --test acceptance criterion_1");
}
