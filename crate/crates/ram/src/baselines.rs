//! Feedforward comparison models: a two-hidden-layer fully connected net and
//! a one-conv-layer net. Both consume the whole canvas, so unlike the
//! attention model their cost grows with the image area.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::diffcore::{softmax, Init, Linear, ParamBlock, Parameterized, Rect};
use crate::error::{Error, Result};
use crate::eval::ImageClassifier;
use crate::image::Image;

/// Which comparison model to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    /// Two rectifier hidden layers of the given width.
    Fc2 { hidden: usize },
    /// 8 filters of 10x10 at stride 5, then one rectifier hidden layer.
    Conv2,
}

/// Uniform interface the supervised training loop drives.
pub trait FeedForwardClassifier: Parameterized {
    fn forward_logits(&mut self, image: &Image, train: bool) -> Result<Vec<f64>>;
    /// Backward from the logits gradient of the most recent cached forward.
    fn backward_from_logits(&mut self, dlogits: &[f64]) -> Result<()>;
    fn name(&self) -> String;
    fn input_side(&self) -> usize;
}

/// Builds a baseline for a square canvas with 10 output classes.
pub fn build_baseline<R: Rng>(kind: BaselineKind, canvas: usize, rng: &mut R) -> Box<dyn FeedForwardClassifier> {
    match kind {
        BaselineKind::Fc2 { hidden } => Box::new(Fc2Model::new(canvas, hidden, 10, rng)),
        BaselineKind::Conv2 => Box::new(Conv2Model::new(canvas, 10, rng)),
    }
}

/// `canvas^2 -> hidden -> hidden -> classes` with rectifiers between.
#[derive(Debug, Clone)]
pub struct Fc2Model {
    canvas: usize,
    hidden: usize,
    lin1: Linear,
    rect1: Rect,
    lin2: Linear,
    rect2: Rect,
    out: Linear,
}

impl Fc2Model {
    pub fn new<R: Rng>(canvas: usize, hidden: usize, classes: usize, rng: &mut R) -> Self {
        Fc2Model {
            canvas,
            hidden,
            lin1: Linear::with_init("fc2.lin1", canvas * canvas, hidden, Init::He, rng),
            rect1: Rect::new(),
            lin2: Linear::with_init("fc2.lin2", hidden, hidden, Init::He, rng),
            rect2: Rect::new(),
            out: Linear::new("fc2.out", hidden, classes, rng),
        }
    }
}

impl Parameterized for Fc2Model {
    fn visit_params(&self, f: &mut dyn FnMut(&ParamBlock)) {
        self.lin1.visit_params(f);
        self.lin2.visit_params(f);
        self.out.visit_params(f);
    }
    fn visit_params_mut(&mut self, f: &mut dyn FnMut(&mut ParamBlock)) {
        self.lin1.visit_params_mut(f);
        self.lin2.visit_params_mut(f);
        self.out.visit_params_mut(f);
    }
}

impl FeedForwardClassifier for Fc2Model {
    fn forward_logits(&mut self, image: &Image, train: bool) -> Result<Vec<f64>> {
        if image.width() != self.canvas || image.height() != self.canvas {
            return Err(Error::Dimension {
                op: "fc2 forward",
                expected: format!("{0}x{0} image", self.canvas),
                got: format!("{}x{}", image.width(), image.height()),
            });
        }
        if train {
            let h1 = self.rect1.forward(&self.lin1.forward(image.data())?);
            let h2 = self.rect2.forward(&self.lin2.forward(&h1)?);
            self.out.forward(&h2)
        } else {
            let h1 = self.rect1.infer(&self.lin1.infer(image.data())?);
            let h2 = self.rect2.infer(&self.lin2.infer(&h1)?);
            self.out.infer(&h2)
        }
    }

    fn backward_from_logits(&mut self, dlogits: &[f64]) -> Result<()> {
        let dh2 = self.out.backward(dlogits)?;
        let dpre2 = self.rect2.backward(&dh2)?;
        let dh1 = self.lin2.backward(&dpre2)?;
        let dpre1 = self.rect1.backward(&dh1)?;
        self.lin1.backward(&dpre1)?;
        Ok(())
    }

    fn name(&self) -> String {
        format!("fc2-{}", self.hidden)
    }

    fn input_side(&self) -> usize {
        self.canvas
    }
}

pub const CONV_FILTERS: usize = 8;
pub const CONV_FILTER_SIDE: usize = 10;
pub const CONV_STRIDE: usize = 5;

/// Hidden width after the conv layer: 256 for canvases up to 60, and 86 for
/// the 100x100 task so the parameter count stays comparable.
pub fn conv_hidden_for_canvas(canvas: usize) -> usize {
    if canvas > 60 {
        86
    } else {
        256
    }
}

/// Spatial side of the conv output map.
pub fn conv_output_side(canvas: usize) -> usize {
    (canvas - CONV_FILTER_SIDE) / CONV_STRIDE + 1
}

/// One valid-padding conv layer (8 filters, 10x10, stride 5) with rectifier,
/// then a fully connected rectifier layer and a softmax readout.
///
/// Conv output is flattened filter-major: `f * side^2 + oy * side + ox`.
#[derive(Debug, Clone)]
pub struct Conv2Model {
    canvas: usize,
    out_side: usize,
    /// `(filters x filter_side^2)`: each row one flattened kernel.
    filters: ParamBlock,
    filter_bias: ParamBlock,
    rect1: Rect,
    fc: Linear,
    rect2: Rect,
    out: Linear,
    input_cache: Vec<Vec<f64>>,
}

impl Conv2Model {
    pub fn new<R: Rng>(canvas: usize, classes: usize, rng: &mut R) -> Self {
        let out_side = conv_output_side(canvas);
        let hidden = conv_hidden_for_canvas(canvas);
        let conv_len = CONV_FILTERS * out_side * out_side;
        let k2 = CONV_FILTER_SIDE * CONV_FILTER_SIDE;
        Conv2Model {
            canvas,
            out_side,
            filters: ParamBlock::uniform_init("conv2.filters", CONV_FILTERS, k2, k2, rng),
            filter_bias: ParamBlock::uniform_init("conv2.filter_bias", CONV_FILTERS, 1, k2, rng),
            rect1: Rect::new(),
            fc: Linear::with_init("conv2.fc", conv_len, hidden, Init::He, rng),
            rect2: Rect::new(),
            out: Linear::new("conv2.out", hidden, classes, rng),
            input_cache: Vec::new(),
        }
    }

    /// Fan-in of the first fully connected layer; grows with the canvas.
    pub fn fc_fan_in(&self) -> usize {
        self.fc.in_dim()
    }

    fn conv_forward(&self, image: &Image) -> Vec<f64> {
        let side = self.out_side;
        let mut out = vec![0.0; CONV_FILTERS * side * side];
        for f in 0..CONV_FILTERS {
            let kernel = self.filters.value.row(f);
            let bias = self.filter_bias.value.at(f, 0);
            for oy in 0..side {
                for ox in 0..side {
                    let mut sum = bias;
                    for u in 0..CONV_FILTER_SIDE {
                        let iy = oy * CONV_STRIDE + u;
                        let row = &image.data()[iy * self.canvas + ox * CONV_STRIDE
                            ..iy * self.canvas + ox * CONV_STRIDE + CONV_FILTER_SIDE];
                        let krow = &kernel[u * CONV_FILTER_SIDE..(u + 1) * CONV_FILTER_SIDE];
                        for (k, x) in krow.iter().zip(row) {
                            sum += k * x;
                        }
                    }
                    out[f * side * side + oy * side + ox] = sum;
                }
            }
        }
        out
    }
}

impl Parameterized for Conv2Model {
    fn visit_params(&self, f: &mut dyn FnMut(&ParamBlock)) {
        f(&self.filters);
        f(&self.filter_bias);
        self.fc.visit_params(f);
        self.out.visit_params(f);
    }
    fn visit_params_mut(&mut self, f: &mut dyn FnMut(&mut ParamBlock)) {
        f(&mut self.filters);
        f(&mut self.filter_bias);
        self.fc.visit_params_mut(f);
        self.out.visit_params_mut(f);
    }
}

impl FeedForwardClassifier for Conv2Model {
    fn forward_logits(&mut self, image: &Image, train: bool) -> Result<Vec<f64>> {
        if image.width() != self.canvas || image.height() != self.canvas {
            return Err(Error::Dimension {
                op: "conv2 forward",
                expected: format!("{0}x{0} image", self.canvas),
                got: format!("{}x{}", image.width(), image.height()),
            });
        }
        let conv = self.conv_forward(image);
        if train {
            self.input_cache.push(image.data().to_vec());
            let a1 = self.rect1.forward(&conv);
            let h = self.rect2.forward(&self.fc.forward(&a1)?);
            self.out.forward(&h)
        } else {
            let a1 = self.rect1.infer(&conv);
            let h = self.rect2.infer(&self.fc.infer(&a1)?);
            self.out.infer(&h)
        }
    }

    fn backward_from_logits(&mut self, dlogits: &[f64]) -> Result<()> {
        let dh = self.out.backward(dlogits)?;
        let dpre2 = self.rect2.backward(&dh)?;
        let da1 = self.fc.backward(&dpre2)?;
        let dconv = self.rect1.backward(&da1)?;
        let input = self
            .input_cache
            .pop()
            .ok_or_else(|| Error::State("conv backward with no cached forward".into()))?;

        // First layer: accumulate filter gradients, no input gradient needed.
        let side = self.out_side;
        for f in 0..CONV_FILTERS {
            let mut bias_grad = 0.0;
            for oy in 0..side {
                for ox in 0..side {
                    let d = dconv[f * side * side + oy * side + ox];
                    if d == 0.0 {
                        continue;
                    }
                    bias_grad += d;
                    for u in 0..CONV_FILTER_SIDE {
                        let iy = oy * CONV_STRIDE + u;
                        let in_row = &input[iy * self.canvas + ox * CONV_STRIDE
                            ..iy * self.canvas + ox * CONV_STRIDE + CONV_FILTER_SIDE];
                        let gslice = &mut self.filters.grad.data_mut()
                            [f * CONV_FILTER_SIDE * CONV_FILTER_SIDE + u * CONV_FILTER_SIDE
                                ..f * CONV_FILTER_SIDE * CONV_FILTER_SIDE + (u + 1) * CONV_FILTER_SIDE];
                        for (g, x) in gslice.iter_mut().zip(in_row) {
                            *g += d * x;
                        }
                    }
                }
            }
            self.filter_bias.grad.data_mut()[f] += bias_grad;
        }
        Ok(())
    }

    fn name(&self) -> String {
        "conv2".into()
    }

    fn input_side(&self) -> usize {
        self.canvas
    }
}

impl ImageClassifier for Box<dyn FeedForwardClassifier> {
    fn predict(&mut self, image: &Image, _item_rng: ChaCha8Rng) -> Result<usize> {
        let logits = self.forward_logits(image, false)?;
        let probs = softmax(&logits);
        let mut best = 0;
        for (i, p) in probs.iter().enumerate() {
            if *p > probs[best] {
                best = i;
            }
        }
        Ok(best)
    }

    fn model_name(&self) -> String {
        self.name()
    }
}
