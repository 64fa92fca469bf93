//! Figure rendering: glimpse-path panels, dataset previews, trace dumps.
//!
//! Figures are written as binary portable pixmaps (P6), which need no
//! imaging dependency. A glimpse-path figure lays out `1 + T` panels side by
//! side: the source image with the fixation path overlaid (green when the
//! episode classified correctly, red otherwise; first fixation a filled
//! circle, last a hollow one), then one reconstruction per step showing what
//! the sensor actually delivered, upscaled back to its footprint with
//! nearest-neighbor block replication, finer scales over coarser.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::datasets::Task;
use crate::env::CatchState;
use crate::error::Result;
use crate::glimpse::{build_glimpse, loc_to_pixel, GlimpseLocation, RetinaConfig};
use crate::image::Image;
use crate::model::EpisodeTrace;

pub const GREEN: [u8; 3] = [0, 200, 0];
pub const RED: [u8; 3] = [220, 40, 40];

/// An RGB raster with 8-bit channels.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    width: usize,
    height: usize,
    rgb: Vec<u8>,
}

impl Raster {
    pub fn black(width: usize, height: usize) -> Self {
        Raster {
            width,
            height,
            rgb: vec![0; width * height * 3],
        }
    }

    pub fn from_gray(image: &Image) -> Self {
        let mut out = Raster::black(image.width(), image.height());
        for y in 0..image.height() {
            for x in 0..image.width() {
                let v = (image.get(x, y).clamp(0.0, 1.0) * 255.0).round() as u8;
                out.set(x, y, [v, v, v]);
            }
        }
        out
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, color: [u8; 3]) {
        if x < self.width && y < self.height {
            let i = (y * self.width + x) * 3;
            self.rgb[i..i + 3].copy_from_slice(&color);
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.rgb[i], self.rgb[i + 1], self.rgb[i + 2]]
    }

    /// Copies `other` into this raster with its top-left at `(x0, y0)`.
    pub fn blit(&mut self, other: &Raster, x0: usize, y0: usize) {
        for y in 0..other.height {
            for x in 0..other.width {
                self.set(x0 + x, y0 + y, other.get(x, y));
            }
        }
    }

    /// Bresenham line.
    pub fn draw_line(&mut self, from: (i64, i64), to: (i64, i64), color: [u8; 3]) {
        let (mut x0, mut y0) = from;
        let (x1, y1) = to;
        let dx = (x1 - x0).abs();
        let dy = -(y1 - y0).abs();
        let sx = if x0 < x1 { 1 } else { -1 };
        let sy = if y0 < y1 { 1 } else { -1 };
        let mut err = dx + dy;
        loop {
            if x0 >= 0 && y0 >= 0 {
                self.set(x0 as usize, y0 as usize, color);
            }
            if x0 == x1 && y0 == y1 {
                break;
            }
            let e2 = 2 * err;
            if e2 >= dy {
                err += dy;
                x0 += sx;
            }
            if e2 <= dx {
                err += dx;
                y0 += sy;
            }
        }
    }

    /// Filled disc or one-pixel ring.
    pub fn draw_circle(&mut self, center: (i64, i64), radius: i64, color: [u8; 3], filled: bool) {
        let r2 = radius * radius;
        for dy in -radius..=radius {
            for dx in -radius..=radius {
                let d2 = dx * dx + dy * dy;
                let on = if filled {
                    d2 <= r2
                } else {
                    d2 <= r2 && d2 > (radius - 1) * (radius - 1)
                };
                if on {
                    let x = center.0 + dx;
                    let y = center.1 + dy;
                    if x >= 0 && y >= 0 {
                        self.set(x as usize, y as usize, color);
                    }
                }
            }
        }
    }

    /// Binary portable pixmap, `P6`, maxval 255.
    pub fn write_ppm(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        write!(w, "P6\n{} {}\n255\n", self.width, self.height)?;
        w.write_all(&self.rgb)?;
        w.flush()?;
        Ok(())
    }
}

/// What the sensor delivered at one fixation, painted back onto a
/// canvas-sized image: each scale's pooled values are replicated over the
/// scale's footprint, coarsest first so finer scales overdraw the center.
/// Pixels outside every footprint stay black.
pub fn render_reconstruction(source: &Image, loc: GlimpseLocation, cfg: &RetinaConfig) -> Image {
    let glimpse = build_glimpse(source, loc, cfg);
    let center = loc_to_pixel(loc, source.width(), source.height());
    let gw = cfg.patch_width;
    let mut out = Image::zeros(source.width(), source.height());
    for s in (0..cfg.num_scales).rev() {
        let values = &glimpse[s * gw * gw..(s + 1) * gw * gw];
        let factor = 1i64 << s;
        let side = (gw as i64) << s;
        let x0 = center.0 - side / 2;
        let y0 = center.1 - side / 2;
        for py in 0..side {
            let sy = y0 + py;
            if sy < 0 || sy >= source.height() as i64 {
                continue;
            }
            for px in 0..side {
                let sx = x0 + px;
                if sx < 0 || sx >= source.width() as i64 {
                    continue;
                }
                let v = values[(py / factor) as usize * gw + (px / factor) as usize];
                out.set(sx as usize, sy as usize, v);
            }
        }
    }
    out
}

/// The fixations a trace actually sensed at, in order.
fn sensed_path(trace: &EpisodeTrace) -> Vec<GlimpseLocation> {
    trace.steps.iter().map(|s| s.sensed_loc).collect()
}

/// Full glimpse-path figure: `1 + T` horizontal panels.
pub fn render_glimpse_path(
    trace: &EpisodeTrace,
    source: &Image,
    cfg: &RetinaConfig,
    correct: bool,
) -> Raster {
    let w = source.width();
    let h = source.height();
    let steps = trace.steps.len();
    let mut figure = Raster::black((1 + steps) * w, h);

    // Panel 0: the input with the fixation path.
    let mut panel = Raster::from_gray(source);
    let color = if correct { GREEN } else { RED };
    let path = sensed_path(trace);
    let pixels: Vec<(i64, i64)> = path.iter().map(|l| loc_to_pixel(*l, w, h)).collect();
    for pair in pixels.windows(2) {
        panel.draw_line(pair[0], pair[1], color);
    }
    if let Some(first) = pixels.first() {
        panel.draw_circle(*first, 2, color, true);
    }
    if let Some(last) = pixels.last() {
        panel.draw_circle(*last, 2, color, false);
    }
    figure.blit(&panel, 0, 0);

    // Panels 1..=T: what the sensor saw at each step.
    for (i, loc) in path.iter().enumerate() {
        let recon = render_reconstruction(source, *loc, cfg);
        figure.blit(&Raster::from_gray(&recon), (1 + i) * w, 0);
    }
    figure
}

/// Grid of generated test instances, for eyeballing a task's data.
pub fn render_task_preview(task: &Task, grid_rows: usize, grid_cols: usize) -> Raster {
    let canvas = task.canvas();
    let mut out = Raster::black(grid_cols * (canvas + 1) - 1, grid_rows * (canvas + 1) - 1);
    for gy in 0..grid_rows {
        for gx in 0..grid_cols {
            let i = (gy * grid_cols + gx) % task.test_len().max(1);
            let item = task.test_example(i);
            out.blit(&Raster::from_gray(&item.image), gx * (canvas + 1), gy * (canvas + 1));
        }
    }
    out
}

/// Line-delimited episode record for the visualizer: one step per line.
pub fn trace_dump(trace: &EpisodeTrace) -> String {
    let mut out = String::from(
        "t,sensed_x,sensed_y,mean_x,mean_y,sample_x,sample_y,loc_logprob,action,action_logprob,baseline,reward,return\n",
    );
    for (step, ret) in trace.steps.iter().zip(&trace.returns) {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            step.t,
            step.sensed_loc.x,
            step.sensed_loc.y,
            step.loc_mean[0],
            step.loc_mean[1],
            step.loc_sample.x,
            step.loc_sample.y,
            step.loc_logprob,
            step.action.map_or(String::new(), |a| a.to_string()),
            step.action_logprob.map_or(String::new(), |p| p.to_string()),
            step.baseline,
            step.reward,
            ret,
        ));
    }
    out
}

pub fn write_trace_dump(path: &Path, trace: &EpisodeTrace) -> Result<()> {
    std::fs::write(path, trace_dump(trace))?;
    Ok(())
}

/// Line-delimited Catch replay: step, state fields, action, reward.
pub fn catch_replay_dump(history: &[(usize, CatchState, usize, f64)]) -> String {
    let mut out = String::from("step,ball_row,ball_col,ball_dx,paddle_col,action,reward\n");
    for (step, state, action, reward) in history {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            step, state.ball_row, state.ball_col, state.ball_dx, state.paddle_col, action, reward
        ));
    }
    out
}
