//! Extracts a multi-scale glimpse from a synthetic image and writes the
//! sensed content (upscaled back to its footprint) next to the original as
//! `glimpse_demo.ppm`.

use ram::glimpse::{build_glimpse, GlimpseLocation, RetinaConfig};
use ram::image::Image;
use ram::viz::{render_reconstruction, Raster};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // A ring plus a bright corner blob: structure at several scales.
    let side = 64;
    let mut img = Image::zeros(side, side);
    for y in 0..side {
        for x in 0..side {
            let dx = x as f64 - 32.0;
            let dy = y as f64 - 32.0;
            let r = (dx * dx + dy * dy).sqrt();
            if (12.0..16.0).contains(&r) {
                img.set(x, y, 0.9);
            }
            if x > 48 && y < 12 {
                img.set(x, y, 0.6);
            }
        }
    }

    let cfg = RetinaConfig::new(8, 3)?;
    let loc = GlimpseLocation::new(0.15, -0.1);
    let glimpse = build_glimpse(&img, loc, &cfg);
    println!(
        "glimpse at ({:+.2}, {:+.2}): {} values ({} scales x {}x{} patch)",
        loc.x,
        loc.y,
        glimpse.len(),
        cfg.num_scales,
        cfg.patch_width,
        cfg.patch_width
    );
    println!("same length on any image size: that is the bandwidth limit.");

    let recon = render_reconstruction(&img, loc, &cfg);
    let mut fig = Raster::black(2 * side + 1, side);
    fig.blit(&Raster::from_gray(&img), 0, 0);
    fig.blit(&Raster::from_gray(&recon), side + 1, 0);
    fig.write_ppm(std::path::Path::new("glimpse_demo.ppm"))?;
    println!("wrote glimpse_demo.ppm (original | what the sensor delivers)");
    Ok(())
}
