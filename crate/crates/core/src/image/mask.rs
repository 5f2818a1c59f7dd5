//! A single segment as a pixel set, with PBM (`P1`) and run-length forms.

use std::collections::BTreeSet;

use super::PixelCoord;
use crate::error::{Error, Result};

/// Pixel set of one segment on a `width`x`height` grid. Pixels are kept
/// sorted in row-major order and free of duplicates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentMask {
    width: usize,
    height: usize,
    pixels: Vec<PixelCoord>,
}

impl SegmentMask {
    pub fn new(width: usize, height: usize, pixels: impl IntoIterator<Item = PixelCoord>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Dimensions { width, height });
        }
        let set: BTreeSet<(usize, usize)> = pixels.into_iter().map(|p| (p.y, p.x)).collect();
        if let Some(&(y, x)) = set.iter().find(|&&(y, x)| x >= width || y >= height) {
            return Err(Error::OutOfBounds { x, y, width, height });
        }
        Ok(Self { width, height, pixels: set.into_iter().map(|(y, x)| PixelCoord::new(x, y)).collect() })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[PixelCoord] {
        &self.pixels
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn contains(&self, at: PixelCoord) -> bool {
        self.pixels.binary_search_by_key(&(at.y, at.x), |p| (p.y, p.x)).is_ok()
    }

    /// Horizontal runs as `[y, x_start, length]`, row-major.
    pub fn runs(&self) -> Vec<[usize; 3]> {
        let mut runs: Vec<[usize; 3]> = Vec::new();
        for p in &self.pixels {
            match runs.last_mut() {
                Some(run) if run[0] == p.y && run[1] + run[2] == p.x => run[2] += 1,
                _ => runs.push([p.y, p.x, 1]),
            }
        }
        runs
    }

    pub fn from_runs(width: usize, height: usize, runs: &[[usize; 3]]) -> Result<Self> {
        let pixels = runs.iter().flat_map(|&[y, x0, len]| (x0..x0 + len).map(move |x| PixelCoord::new(x, y)));
        Self::new(width, height, pixels)
    }

    /// Plain PBM: `1` marks a pixel inside the segment.
    pub fn to_pbm(&self) -> String {
        let mut grid = vec![b'0'; self.width * self.height];
        for p in &self.pixels {
            grid[p.y * self.width + p.x] = b'1';
        }
        let mut out = format!("P1\n{} {}\n", self.width, self.height);
        for row in grid.chunks_exact(self.width) {
            let cells: Vec<&str> = row.iter().map(|&c| if c == b'1' { "1" } else { "0" }).collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn parse_pbm(text: &str) -> Result<Self> {
        let mut tokens = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .flat_map(str::split_whitespace);
        let magic = tokens.next().unwrap_or("");
        if magic != "P1" {
            return Err(Error::BadMagic { expected: "P1", found: magic.to_string() });
        }
        let mut dim = |what: &str| -> Result<usize> {
            let t = tokens.next().ok_or_else(|| Error::Header(format!("missing {what}")))?;
            t.parse().map_err(|_| Error::Token(t.to_string()))
        };
        let (width, height) = (dim("width")?, dim("height")?);
        let mut pixels = Vec::new();
        let mut n = 0;
        // Plain PBM allows bits without separators, so split each token into characters.
        for c in tokens.flat_map(str::chars) {
            if n == width * height {
                break;
            }
            match c {
                '1' => pixels.push(PixelCoord::new(n % width, n / width)),
                '0' => {}
                other => return Err(Error::Token(other.to_string())),
            }
            n += 1;
        }
        if n < width * height {
            return Err(Error::Truncated { expected: width * height, found: n });
        }
        Self::new(width, height, pixels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn runs_merge_adjacent_pixels() {
        let m = SegmentMask::new(
            4,
            2,
            [(0, 0), (1, 0), (3, 0), (0, 1), (1, 1), (2, 1), (3, 1)].map(|(x, y)| PixelCoord::new(x, y)),
        )
        .unwrap();
        assert_eq!(m.runs(), vec![[0, 0, 2], [0, 3, 1], [1, 0, 4]]);
        assert_eq!(SegmentMask::from_runs(4, 2, &m.runs()).unwrap(), m);
    }

    #[test]
    fn pbm_layout() {
        let m = SegmentMask::new(3, 2, [PixelCoord::new(1, 0), PixelCoord::new(2, 1)]).unwrap();
        assert_eq!(m.to_pbm(), "P1\n3 2\n0 1 0\n0 0 1\n");
        assert_eq!(SegmentMask::parse_pbm(&m.to_pbm()).unwrap(), m);
        assert_eq!(SegmentMask::parse_pbm("P1 # c\n3 2\n010\n001").unwrap(), m);
    }

    #[test]
    fn rejects_out_of_bounds() {
        assert!(matches!(SegmentMask::new(2, 2, [PixelCoord::new(2, 0)]), Err(Error::OutOfBounds { .. })));
        assert!(matches!(SegmentMask::parse_pbm("P4\n1 1\n"), Err(Error::BadMagic { .. })));
        assert!(matches!(SegmentMask::parse_pbm("P1\n2 2\n1 0 1\n"), Err(Error::Truncated { .. })));
    }

    #[test]
    fn duplicates_collapse() {
        let m = SegmentMask::new(2, 2, [PixelCoord::new(1, 1), PixelCoord::new(1, 1)]).unwrap();
        assert_eq!(m.len(), 1);
        assert!(m.contains(PixelCoord::new(1, 1)));
        assert!(!m.contains(PixelCoord::new(0, 1)));
    }
}
