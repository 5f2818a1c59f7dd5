//! Pixel, image and label-map data model plus the on-disk formats.
//!
//! Coordinates are `(x = column, y = row)` with the origin at the top-left
//! pixel; all grids are stored row-major.

mod labels;
mod mask;
mod ppm;
mod render;

pub use labels::{LabelMap, SMAP_MAGIC};
pub use mask::SegmentMask;
pub use ppm::{load_ppm, save_ppm};
pub use render::{overlay_mask, render_contours, CONTOUR_COLOR};

use crate::error::{Error, Result};

/// Number of representable values per 8-bit channel.
pub const PALETTE_DEPTH: u32 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Rgb {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl Rgb {
    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        Self { r, g, b }
    }

    pub const fn channels(self) -> [u8; 3] {
        [self.r, self.g, self.b]
    }

    pub const fn from_channels(c: [u8; 3]) -> Self {
        Self { r: c[0], g: c[1], b: c[2] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PixelCoord {
    pub x: usize,
    pub y: usize,
}

impl PixelCoord {
    pub const fn new(x: usize, y: usize) -> Self {
        Self { x, y }
    }
}

impl std::fmt::Display for PixelCoord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{},{}", self.x, self.y)
    }
}

/// Offsets of the 8-connected neighborhood, row by row.
pub(crate) const NEIGHBORS_8: [(isize, isize); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

pub(crate) const NEIGHBORS_4: [(isize, isize); 4] = [(0, -1), (-1, 0), (1, 0), (0, 1)];

/// Visits the in-bounds neighbors of `idx` (a row-major index) on a
/// `width`x`height` grid.
#[inline]
pub(crate) fn for_each_neighbor(
    width: usize,
    height: usize,
    idx: usize,
    offsets: &[(isize, isize)],
    mut f: impl FnMut(usize),
) {
    let (x, y) = ((idx % width) as isize, (idx / width) as isize);
    for &(dx, dy) in offsets {
        let (nx, ny) = (x + dx, y + dy);
        if nx >= 0 && ny >= 0 && (nx as usize) < width && (ny as usize) < height {
            f(ny as usize * width + nx as usize);
        }
    }
}

/// A `width`x`height` 8-bit RGB image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageRgb {
    width: usize,
    height: usize,
    pixels: Vec<Rgb>,
}

impl ImageRgb {
    pub fn new(width: usize, height: usize, pixels: Vec<Rgb>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Dimensions { width, height });
        }
        let expected = width.checked_mul(height).ok_or(Error::Dimensions { width, height })?;
        if pixels.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "{width}x{height} image needs {expected} pixels, got {}",
                pixels.len()
            )));
        }
        Ok(Self { width, height, pixels })
    }

    pub fn filled(width: usize, height: usize, color: Rgb) -> Result<Self> {
        Self::new(width, height, vec![color; width.saturating_mul(height)])
    }

    /// Builds an image by evaluating `f(x, y)` for every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> Rgb) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width.saturating_mul(height));
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[Rgb] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [Rgb] {
        &mut self.pixels
    }

    pub fn contains(&self, at: PixelCoord) -> bool {
        at.x < self.width && at.y < self.height
    }

    pub fn check_bounds(&self, at: PixelCoord) -> Result<()> {
        if self.contains(at) {
            Ok(())
        } else {
            Err(Error::OutOfBounds { x: at.x, y: at.y, width: self.width, height: self.height })
        }
    }

    #[inline]
    pub fn index_of(&self, at: PixelCoord) -> usize {
        at.y * self.width + at.x
    }

    #[inline]
    pub fn coord_of(&self, idx: usize) -> PixelCoord {
        PixelCoord::new(idx % self.width, idx / self.width)
    }

    /// Panics if `at` is out of bounds.
    #[inline]
    pub fn get(&self, at: PixelCoord) -> Rgb {
        assert!(self.contains(at), "pixel {at} outside {}x{}", self.width, self.height);
        self.pixels[self.index_of(at)]
    }

    #[inline]
    pub fn set(&mut self, at: PixelCoord, color: Rgb) {
        assert!(self.contains(at), "pixel {at} outside {}x{}", self.width, self.height);
        let i = self.index_of(at);
        self.pixels[i] = color;
    }
}
