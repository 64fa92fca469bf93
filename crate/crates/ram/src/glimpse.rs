//! Multi-resolution glimpse sensor.
//!
//! A glimpse at location `l` concatenates `k` square patches centered on the
//! same pixel: the finest is `g_w x g_w` at full resolution, and each
//! successive patch doubles in width before being pooled back down to
//! `g_w x g_w` by exact block means. The output length `k * g_w^2` is
//! independent of the source image size.

use crate::error::{Error, Result};
use crate::image::Image;

/// Retina geometry: finest patch width and number of scales.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetinaConfig {
    pub patch_width: usize,
    pub num_scales: usize,
}

impl RetinaConfig {
    pub fn new(patch_width: usize, num_scales: usize) -> Result<Self> {
        if patch_width < 1 || num_scales < 1 {
            return Err(Error::Config(format!(
                "retina needs patch_width >= 1 and num_scales >= 1, got {patch_width}x{num_scales}"
            )));
        }
        Ok(RetinaConfig {
            patch_width,
            num_scales,
        })
    }

    /// Patch width at scale `s`: `patch_width * 2^s`.
    pub fn scale_width(&self, s: usize) -> usize {
        self.patch_width << s
    }

    /// Length of the flattened glimpse vector: `num_scales * patch_width^2`.
    pub fn glimpse_len(&self) -> usize {
        self.num_scales * self.patch_width * self.patch_width
    }
}

/// A fixation point in normalized coordinates. `(0, 0)` is the image center
/// and `(-1, -1)` the top-left corner. Construction clamps to `[-1, 1]^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlimpseLocation {
    pub x: f64,
    pub y: f64,
}

impl GlimpseLocation {
    pub fn new(x: f64, y: f64) -> Self {
        GlimpseLocation {
            x: x.clamp(-1.0, 1.0),
            y: y.clamp(-1.0, 1.0),
        }
    }

    pub fn as_array(&self) -> [f64; 2] {
        [self.x, self.y]
    }
}

/// Maps a normalized location to the nearest pixel:
/// `px = round((x + 1)/2 * (width - 1))` with half-away-from-zero rounding.
pub fn loc_to_pixel(l: GlimpseLocation, width: usize, height: usize) -> (i64, i64) {
    let px = ((l.x + 1.0) / 2.0 * (width.saturating_sub(1)) as f64).round();
    let py = ((l.y + 1.0) / 2.0 * (height.saturating_sub(1)) as f64).round();
    (px as i64, py as i64)
}

/// Copies a `width x width` patch centered at `center`; pixels outside the
/// source read as zero. The center pixel lands at patch index
/// `floor(width / 2)` in both axes.
pub fn extract_patch(image: &Image, center: (i64, i64), width: usize) -> Image {
    let mut out = Image::zeros(width, width);
    let half = (width / 2) as i64;
    let x0 = center.0 - half;
    let y0 = center.1 - half;
    for py in 0..width {
        for px in 0..width {
            let v = image.get_or_zero(x0 + px as i64, y0 + py as i64);
            if v != 0.0 {
                out.set(px, py, v);
            }
        }
    }
    out
}

/// Downsamples by averaging non-overlapping `factor x factor` blocks. The
/// patch side must be divisible by `factor`.
pub fn downsample_block_mean(patch: &Image, factor: usize) -> Result<Image> {
    if factor == 0 || !patch.width().is_multiple_of(factor) || !patch.height().is_multiple_of(factor) {
        return Err(Error::Dimension {
            op: "block-mean downsample",
            expected: format!("side divisible by factor {factor}"),
            got: format!("{}x{}", patch.width(), patch.height()),
        });
    }
    let ow = patch.width() / factor;
    let oh = patch.height() / factor;
    let inv = 1.0 / (factor * factor) as f64;
    let mut out = Image::zeros(ow, oh);
    for oy in 0..oh {
        for ox in 0..ow {
            let mut sum = 0.0;
            for by in 0..factor {
                for bx in 0..factor {
                    sum += patch.get(ox * factor + bx, oy * factor + by);
                }
            }
            out.set(ox, oy, sum * inv);
        }
    }
    Ok(out)
}

/// Full retina encoding: all scales share one rounded center pixel, each
/// scale is extracted at `patch_width * 2^s`, pooled to `patch_width`, and
/// the scales are concatenated finest first, row-major within each scale.
pub fn build_glimpse(image: &Image, l: GlimpseLocation, cfg: &RetinaConfig) -> Vec<f64> {
    let center = loc_to_pixel(l, image.width(), image.height());
    let mut out = Vec::with_capacity(cfg.glimpse_len());
    for s in 0..cfg.num_scales {
        let raw = extract_patch(image, center, cfg.scale_width(s));
        let pooled = downsample_block_mean(&raw, 1 << s)
            .expect("scale width is a power-of-two multiple of patch width");
        out.extend_from_slice(pooled.data());
    }
    out
}
