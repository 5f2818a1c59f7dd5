//! Result rendering: segment contours and translucent mask overlays.

use super::{for_each_neighbor, ImageRgb, LabelMap, PixelCoord, Rgb, NEIGHBORS_4};
use crate::error::{Error, Result};

pub const CONTOUR_COLOR: Rgb = Rgb::new(255, 0, 0);

/// Paints every pixel whose 4-neighborhood crosses a label boundary with
/// [`CONTOUR_COLOR`].
pub fn render_contours(img: &ImageRgb, lm: &LabelMap) -> Result<ImageRgb> {
    if img.width() != lm.width() || img.height() != lm.height() {
        return Err(Error::DimensionMismatch(format!(
            "image is {}x{}, label map is {}x{}",
            img.width(),
            img.height(),
            lm.width(),
            lm.height()
        )));
    }
    if lm.has_unprocessed() {
        return Err(Error::ZeroLabel);
    }
    let (w, h) = (img.width(), img.height());
    let mut out = img.clone();
    let labels = lm.labels();
    for (i, px) in out.pixels_mut().iter_mut().enumerate() {
        let mut boundary = false;
        for_each_neighbor(w, h, i, &NEIGHBORS_4, |j| boundary |= labels[j] != labels[i]);
        if boundary {
            *px = CONTOUR_COLOR;
        }
    }
    Ok(out)
}

/// Blends `color` into the masked pixels: `round((1 - alpha) * orig + alpha * color)`.
pub fn overlay_mask(img: &ImageRgb, mask: &[PixelCoord], color: Rgb, alpha: f64) -> Result<ImageRgb> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Range(format!("alpha {alpha} outside [0, 1]")));
    }
    for &p in mask {
        img.check_bounds(p)?;
    }
    let blend = |o: u8, c: u8| ((1.0 - alpha) * o as f64 + alpha * c as f64).round().clamp(0.0, 255.0) as u8;
    let mut out = img.clone();
    for &p in mask {
        let o = img.get(p);
        out.set(p, Rgb::new(blend(o.r, color.r), blend(o.g, color.g), blend(o.b, color.b)));
    }
    Ok(out)
}
