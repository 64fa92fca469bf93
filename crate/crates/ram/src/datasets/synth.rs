//! Synthetic task generators: Translated and Cluttered Translated digits.
//!
//! Both are built on the fly from a base digit and an rng, so a training
//! stream never has to be stored. Draw order is fixed and documented:
//! translation offset x then y; then per clutter piece, source index,
//! subpatch x/y, canvas x/y.

use rand::Rng;

use crate::error::{Error, Result};
use crate::image::Image;

use super::mnist::{LabeledImage, MnistSet};

/// Copies `digit` to a uniformly random position on a larger blank canvas.
pub fn make_translated<R: Rng>(
    digit: &LabeledImage,
    canvas: usize,
    rng: &mut R,
) -> Result<LabeledImage> {
    let w = digit.image.width();
    let h = digit.image.height();
    if canvas < w || canvas < h {
        return Err(Error::Config(format!(
            "canvas {canvas} smaller than digit {w}x{h}"
        )));
    }
    let ox = rng.gen_range(0..=canvas - w);
    let oy = rng.gen_range(0..=canvas - h);
    let mut out = Image::zeros(canvas, canvas);
    for y in 0..h {
        for x in 0..w {
            let v = digit.image.get(x, y);
            if v != 0.0 {
                out.set(ox + x, oy + y, v);
            }
        }
    }
    Ok(LabeledImage {
        image: out,
        label: digit.label,
    })
}

/// Translated digit plus `clutter_count` random sub-patches cut from other
/// digits and composited by elementwise max (which keeps intensities in
/// `[0, 1]`; additive compositing would not).
///
/// `exclude_index` is the base digit's own index in `clutter_source`, so
/// clutter never comes from the instance being classified.
pub fn make_cluttered<R: Rng>(
    digit: &LabeledImage,
    canvas: usize,
    clutter_count: usize,
    clutter_patch: usize,
    clutter_source: &MnistSet,
    exclude_index: usize,
    rng: &mut R,
) -> Result<LabeledImage> {
    let mut out = make_translated(digit, canvas, rng)?;
    if clutter_source.len() < 2 {
        return Err(Error::Config(
            "clutter source needs at least two digits".into(),
        ));
    }
    let src_w = clutter_source.cols();
    let src_h = clutter_source.rows();
    if clutter_patch > src_w || clutter_patch > src_h || clutter_patch > canvas {
        return Err(Error::Config(format!(
            "clutter patch {clutter_patch} does not fit source {src_w}x{src_h} or canvas {canvas}"
        )));
    }
    for _ in 0..clutter_count {
        let mut source_idx = rng.gen_range(0..clutter_source.len());
        while source_idx == exclude_index {
            source_idx = rng.gen_range(0..clutter_source.len());
        }
        let sx = rng.gen_range(0..=src_w - clutter_patch);
        let sy = rng.gen_range(0..=src_h - clutter_patch);
        let cx = rng.gen_range(0..=canvas - clutter_patch);
        let cy = rng.gen_range(0..=canvas - clutter_patch);
        let source = clutter_source.image(source_idx);
        for y in 0..clutter_patch {
            for x in 0..clutter_patch {
                let v = source.get(sx + x, sy + y);
                let cur = out.image.get(cx + x, cy + y);
                if v > cur {
                    out.image.set(cx + x, cy + y, v);
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::mnist::MnistSet;
    use crate::rng::substream;

    fn fake_digit(fill: f64, label: usize) -> LabeledImage {
        let mut image = Image::zeros(28, 28);
        for y in 10..18 {
            for x in 10..18 {
                image.set(x, y, fill);
            }
        }
        LabeledImage { image, label }
    }

    fn fake_set(n: usize) -> MnistSet {
        let mut pixels = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            pixels.extend(std::iter::repeat((i * 20 + 30) as u8).take(28 * 28));
            labels.push((i % 10) as u8);
        }
        MnistSet::from_parts(28, 28, pixels, labels).unwrap()
    }

    #[test]
    fn canvas_equal_to_digit_is_identity() {
        let digit = fake_digit(0.8, 3);
        let mut rng = substream(50, "synth", 0);
        let out = make_translated(&digit, 28, &mut rng).unwrap();
        assert_eq!(out.image, digit.image);
        assert_eq!(out.label, 3);
    }

    #[test]
    fn translation_preserves_pixel_sum_and_label() {
        let digit = fake_digit(0.6, 5);
        let mut rng = substream(50, "synth", 1);
        let out = make_translated(&digit, 60, &mut rng).unwrap();
        assert!((out.image.pixel_sum() - digit.image.pixel_sum()).abs() < 1e-9);
        assert_eq!(out.label, 5);
        assert_eq!(out.image.width(), 60);
    }

    #[test]
    fn undersized_canvas_is_rejected() {
        let digit = fake_digit(0.5, 0);
        let mut rng = substream(50, "synth", 2);
        assert!(make_translated(&digit, 27, &mut rng).is_err());
    }

    #[test]
    fn translation_is_reproducible_from_the_seed() {
        let digit = fake_digit(0.5, 1);
        let a = make_translated(&digit, 60, &mut substream(51, "synth", 9)).unwrap();
        let b = make_translated(&digit, 60, &mut substream(51, "synth", 9)).unwrap();
        assert_eq!(a.image, b.image);
    }

    #[test]
    fn advancing_rng_moves_the_digit() {
        let digit = fake_digit(0.5, 1);
        let mut rng = substream(51, "synth", 10);
        let a = make_translated(&digit, 60, &mut rng).unwrap();
        let b = make_translated(&digit, 60, &mut rng).unwrap();
        assert_ne!(a.image, b.image);
    }

    #[test]
    fn zero_clutter_reduces_to_translation() {
        let digit = fake_digit(0.7, 2);
        let source = fake_set(5);
        let a = make_cluttered(&digit, 60, 0, 8, &source, 0, &mut substream(52, "synth", 0)).unwrap();
        let b = make_translated(&digit, 60, &mut substream(52, "synth", 0)).unwrap();
        assert_eq!(a.image, b.image);
    }

    #[test]
    fn clutter_keeps_values_in_range_and_label_intact() {
        let digit = fake_digit(1.0, 8);
        let source = fake_set(6);
        let out = make_cluttered(&digit, 60, 8, 8, &source, 2, &mut substream(52, "synth", 1)).unwrap();
        assert_eq!(out.label, 8);
        assert!(out.image.data().iter().all(|&v| (0.0..=1.0).contains(&v)));
        // Clutter added nonzero content beyond the digit itself.
        assert!(out.image.pixel_sum() > digit.image.pixel_sum());
    }

    #[test]
    fn table_task_shapes_are_constructible() {
        // 60x60 with 4 pieces and 100x100 with 8 pieces.
        let digit = fake_digit(0.9, 4);
        let source = fake_set(4);
        let mut rng = substream(52, "synth", 2);
        let a = make_cluttered(&digit, 60, 4, 8, &source, 0, &mut rng).unwrap();
        assert_eq!(a.image.width(), 60);
        let b = make_cluttered(&digit, 100, 8, 8, &source, 0, &mut rng).unwrap();
        assert_eq!(b.image.width(), 100);
    }
}
