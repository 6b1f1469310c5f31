//! 8-bit visualizations: a diverging colormap for signed gradients and a
//! simple gamma preview for radiance. The PFM files are the lossless
//! record; PNG output is a sidecar.

use crate::integrator::GradImage;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PngError {
    #[error("png encode error: {0}")]
    Encode(String),
}

/// Round half away from zero, then clamp to u8.
fn quantize(v: f64) -> u8 {
    let r = if v >= 0.0 { (v + 0.5).floor() } else { (v - 0.5).ceil() };
    r.clamp(0.0, 255.0) as u8
}

/// Diverging colormap for one channel of a signed gradient image:
/// negative → blue, zero → white, positive → red, via t = clamp(v·scale, −1, 1).
pub fn write_png_signed(img: &GradImage, channel: usize, scale: f64, path: &Path) -> Result<(), PngError> {
    assert!(scale > 0.0, "scale must be positive");
    let mut out = image::RgbImage::new(img.width, img.height);
    for y in 0..img.height {
        for x in 0..img.width {
            let v = img.at(x, y)[channel];
            let t = (v * scale).clamp(-1.0, 1.0);
            let ramp = quantize(255.0 * (1.0 - t.abs()));
            let px = if t >= 0.0 {
                image::Rgb([255, ramp, ramp])
            } else {
                image::Rgb([ramp, ramp, 255])
            };
            out.put_pixel(x, y, px);
        }
    }
    out.save(path).map_err(|e| PngError::Encode(e.to_string()))
}

/// Scale that maps the largest |v| of a channel to full color.
pub fn auto_scale(img: &GradImage, channel: usize) -> f64 {
    let m = img.data.iter().map(|p| p[channel].abs()).fold(0.0, f64::max);
    if m > 0.0 {
        1.0 / m
    } else {
        1.0
    }
}

/// Gamma-2.2 preview of a radiance image.
pub fn write_png_radiance(img: &GradImage, path: &Path) -> Result<(), PngError> {
    let mut out = image::RgbImage::new(img.width, img.height);
    for y in 0..img.height {
        for x in 0..img.width {
            let p = img.at(x, y);
            let map = |v: f64| quantize(255.0 * v.max(0.0).min(1.0).powf(1.0 / 2.2));
            out.put_pixel(x, y, image::Rgb([map(p[0]), map(p[1]), map(p[2])]));
        }
    }
    out.save(path).map_err(|e| PngError::Encode(e.to_string()))
}
