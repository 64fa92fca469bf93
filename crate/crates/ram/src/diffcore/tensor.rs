//! Dense row-major matrices and trainable parameter blocks.

use rand::Rng;

use crate::error::{Error, Result};

/// A dense matrix of `f64` in row-major order. Vectors are `rows x 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor2D {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Tensor2D {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Tensor2D {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension {
                op: "Tensor2D::from_vec",
                expected: format!("{rows}x{cols} = {} values", rows * cols),
                got: format!("{} values", data.len()),
            });
        }
        Ok(Tensor2D { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn fill(&mut self, v: f64) {
        self.data.iter_mut().for_each(|x| *x = v);
    }

    pub fn same_shape(&self, other: &Tensor2D) -> bool {
        self.rows == other.rows && self.cols == other.cols
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `out = self * x` (matrix-vector product).
    ///
    /// Four independent accumulators per row; the summation order is fixed,
    /// so results are reproducible run to run.
    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (r, o) in out.iter_mut().enumerate() {
            let row = self.row(r);
            let mut acc = [0.0f64; 4];
            let mut wc = row.chunks_exact(4);
            let mut xc = x.chunks_exact(4);
            for (w4, x4) in (&mut wc).zip(&mut xc) {
                acc[0] += w4[0] * x4[0];
                acc[1] += w4[1] * x4[1];
                acc[2] += w4[2] * x4[2];
                acc[3] += w4[3] * x4[3];
            }
            let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
            for (w, xi) in wc.remainder().iter().zip(xc.remainder()) {
                s += w * xi;
            }
            *o = s;
        }
    }

    /// `out += self^T * dy` (transposed matrix-vector product, accumulating).
    ///
    /// Walks rows of `self` so the access pattern stays contiguous.
    pub fn matvec_transposed_acc(&self, dy: &[f64], out: &mut [f64]) {
        debug_assert_eq!(dy.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        for (r, &d) in dy.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            let row = self.row(r);
            for (o, w) in out.iter_mut().zip(row) {
                *o += w * d;
            }
        }
    }

    /// `self += dy x^T` (outer product, accumulating). Used for weight
    /// gradients of affine layers.
    pub fn add_outer(&mut self, dy: &[f64], x: &[f64]) {
        debug_assert_eq!(dy.len(), self.rows);
        debug_assert_eq!(x.len(), self.cols);
        for (r, &d) in dy.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            let row = &mut self.data[r * self.cols..(r + 1) * self.cols];
            for (w, xi) in row.iter_mut().zip(x) {
                *w += d * xi;
            }
        }
    }

    /// `self += other` (elementwise).
    pub fn add_assign(&mut self, other: &Tensor2D) {
        debug_assert!(self.same_shape(other));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }
}

/// One trainable tensor together with its gradient accumulator and momentum
/// buffer. The three tensors always share a shape.
#[derive(Debug, Clone)]
pub struct ParamBlock {
    name: String,
    pub value: Tensor2D,
    pub grad: Tensor2D,
    pub velocity: Tensor2D,
}

impl ParamBlock {
    /// A block initialized uniformly in `[-r, r]` with `r = 1/sqrt(fan_in)`,
    /// which keeps pre-activations of order one at init.
    pub fn uniform_init<R: Rng>(name: &str, rows: usize, cols: usize, fan_in: usize, rng: &mut R) -> Self {
        Self::bounded_uniform_init(name, rows, cols, 1.0 / (fan_in.max(1) as f64).sqrt(), rng)
    }

    /// He bound `r = sqrt(6/fan_in)`: unit signal variance through a
    /// rectifier layer, so deep rectifier stacks neither vanish nor blow up.
    pub fn he_uniform_init<R: Rng>(name: &str, rows: usize, cols: usize, fan_in: usize, rng: &mut R) -> Self {
        Self::bounded_uniform_init(name, rows, cols, (6.0 / fan_in.max(1) as f64).sqrt(), rng)
    }

    fn bounded_uniform_init<R: Rng>(name: &str, rows: usize, cols: usize, r: f64, rng: &mut R) -> Self {
        let mut value = Tensor2D::zeros(rows, cols);
        for v in value.data_mut() {
            *v = rng.gen_range(-r..=r);
        }
        ParamBlock {
            name: name.to_string(),
            value,
            grad: Tensor2D::zeros(rows, cols),
            velocity: Tensor2D::zeros(rows, cols),
        }
    }

    pub fn zeros(name: &str, rows: usize, cols: usize) -> Self {
        ParamBlock {
            name: name.to_string(),
            value: Tensor2D::zeros(rows, cols),
            grad: Tensor2D::zeros(rows, cols),
            velocity: Tensor2D::zeros(rows, cols),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn param_count(&self) -> usize {
        self.value.len()
    }

    pub fn zero_grad(&mut self) {
        self.grad.fill(0.0);
    }
}

/// Anything that owns a flat collection of named parameter blocks.
///
/// The optimizer, checkpoint container, gradient checker, and multi-worker
/// gradient reduction all operate through this trait. Blocks must be visited
/// in a stable order.
pub trait Parameterized {
    fn visit_params(&self, f: &mut dyn FnMut(&ParamBlock));
    fn visit_params_mut(&mut self, f: &mut dyn FnMut(&mut ParamBlock));

    fn param_count(&self) -> usize {
        let mut n = 0;
        self.visit_params(&mut |b| n += b.param_count());
        n
    }

    fn zero_grads(&mut self) {
        self.visit_params_mut(&mut |b| b.zero_grad());
    }

    /// Sums another instance's gradients into this one. Shapes must match;
    /// used to reduce per-worker gradient contributions.
    fn add_grads_from(&mut self, other: &dyn Parameterized) {
        let mut theirs: Vec<Tensor2D> = Vec::new();
        other.visit_params(&mut |b| theirs.push(b.grad.clone()));
        let mut i = 0;
        self.visit_params_mut(&mut |b| {
            b.grad.add_assign(&theirs[i]);
            i += 1;
        });
        assert_eq!(i, theirs.len(), "parameter block count mismatch");
    }

    /// Copies parameter values from another instance (e.g. refreshing a
    /// worker's read-only copy after an optimizer step).
    fn copy_values_from(&mut self, other: &dyn Parameterized) {
        let mut theirs: Vec<Tensor2D> = Vec::new();
        other.visit_params(&mut |b| theirs.push(b.value.clone()));
        let mut i = 0;
        self.visit_params_mut(&mut |b| {
            assert!(b.value.same_shape(&theirs[i]), "shape mismatch in copy_values_from");
            b.value = theirs[i].clone();
            i += 1;
        });
        assert_eq!(i, theirs.len(), "parameter block count mismatch");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    #[test]
    fn from_vec_rejects_bad_length() {
        assert!(Tensor2D::from_vec(2, 2, vec![1.0; 3]).is_err());
    }

    #[test]
    fn matvec_matches_naive_loop() {
        let mut rng = substream(1, "test", 0);
        for _ in 0..50 {
            let rows = rng.gen_range(1..=9);
            let cols = rng.gen_range(1..=9);
            let mut w = Tensor2D::zeros(rows, cols);
            for v in w.data_mut() {
                *v = rng.gen_range(-2.0..2.0);
            }
            let x: Vec<f64> = (0..cols).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let mut out = vec![0.0; rows];
            w.matvec(&x, &mut out);
            for r in 0..rows {
                let mut expect = 0.0;
                for c in 0..cols {
                    expect += w.at(r, c) * x[c];
                }
                assert!((out[r] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn transposed_matvec_accumulates() {
        let w = Tensor2D::from_vec(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let mut out = vec![1.0, 1.0, 1.0];
        w.matvec_transposed_acc(&[1.0, -1.0], &mut out);
        assert_eq!(out, vec![1.0 + 1.0 - 4.0, 1.0 + 2.0 - 5.0, 1.0 + 3.0 - 6.0]);
    }

    #[test]
    fn uniform_init_respects_fan_in_bound(){
        let mut rng = substream(2, "test", 0);
        let block = ParamBlock::uniform_init("w", 16, 25, 25, &mut rng);
        let bound = 1.0 / 5.0;
        assert!(block.value.data().iter().all(|v| v.abs() <= bound));
        assert!(block.value.data().iter().any(|v| v.abs() > bound * 0.5));
    }
}
