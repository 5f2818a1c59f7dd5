//! Segment label grids and their `.smap` text form.

use std::collections::BTreeMap;

use super::PixelCoord;
use crate::error::{Error, Result};

pub const SMAP_MAGIC: &str = "SEEDSEG-LABELS 1";

/// Row-major grid of segment labels. Label 0 marks unprocessed pixels;
/// `max_label` is the highest label handed out so far.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    width: usize,
    height: usize,
    labels: Vec<u32>,
    max_label: u32,
}

impl LabelMap {
    /// All-zero map.
    pub fn new(width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Dimensions { width, height });
        }
        Ok(Self { width, height, labels: vec![0; width * height], max_label: 0 })
    }

    /// Wraps an existing grid; `max_label` becomes the largest value present.
    pub fn from_labels(width: usize, height: usize, labels: Vec<u32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Dimensions { width, height });
        }
        if labels.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{width}x{height} label map needs {} labels, got {}",
                width * height,
                labels.len()
            )));
        }
        let max_label = labels.iter().copied().max().unwrap_or(0);
        Ok(Self { width, height, labels, max_label })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn max_label(&self) -> u32 {
        self.max_label
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    #[inline]
    pub fn get(&self, at: PixelCoord) -> u32 {
        assert!(at.x < self.width && at.y < self.height, "pixel {at} outside label map");
        self.labels[at.y * self.width + at.x]
    }

    #[inline]
    pub(crate) fn at_index(&self, idx: usize) -> u32 {
        self.labels[idx]
    }

    /// Assigns `label` to the pixel at row-major index `idx`, raising
    /// `max_label` when needed.
    #[inline]
    pub(crate) fn assign(&mut self, idx: usize, label: u32) {
        self.labels[idx] = label;
        self.max_label = self.max_label.max(label);
    }

    pub fn has_unprocessed(&self) -> bool {
        self.labels.contains(&0)
    }

    /// Pixel count per label (including 0 when present).
    pub fn sizes(&self) -> BTreeMap<u32, usize> {
        let mut sizes = BTreeMap::new();
        for &l in &self.labels {
            *sizes.entry(l).or_insert(0) += 1;
        }
        sizes
    }

    /// Coordinates carrying `label`, in row-major order.
    pub fn pixels_with(&self, label: u32) -> Vec<PixelCoord> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == label)
            .map(|(i, _)| PixelCoord::new(i % self.width, i / self.width))
            .collect()
    }

    pub fn to_smap(&self) -> String {
        let mut out = format!("{SMAP_MAGIC}\n{} {} {}\n", self.width, self.height, self.max_label);
        for row in self.labels.chunks_exact(self.width) {
            let line: Vec<String> = row.iter().map(u32::to_string).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn parse_smap(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let magic = lines.next().unwrap_or("").trim_end();
        if magic != SMAP_MAGIC {
            if magic.starts_with("SEEDSEG-LABELS") {
                return Err(Error::Version(magic.to_string()));
            }
            return Err(Error::BadMagic { expected: SMAP_MAGIC, found: magic.to_string() });
        }
        let dims = parse_row(lines.next().unwrap_or(""))?;
        let [width, height, k] = dims[..] else {
            return Err(Error::Header("expected \"<W> <H> <k>\"".into()));
        };
        let (width, height) = (width as usize, height as usize);
        if width == 0 || height == 0 {
            return Err(Error::Dimensions { width, height });
        }
        let mut labels = Vec::with_capacity(width * height);
        for y in 0..height {
            let row = parse_row(lines.next().ok_or(Error::Truncated { expected: height, found: y })?)?;
            if row.len() != width {
                return Err(Error::DimensionMismatch(format!("row {y} has {} labels, expected {width}", row.len())));
            }
            if let Some(&bad) = row.iter().find(|&&l| l > k) {
                return Err(Error::Range(format!("label {bad} exceeds k={k}")));
            }
            labels.extend(row);
        }
        Ok(Self { width, height, labels, max_label: k })
    }
}

fn parse_row(line: &str) -> Result<Vec<u32>> {
    line.split_whitespace()
        .map(|t| t.parse::<u32>().map_err(|_| Error::Token(t.to_string())))
        .collect()
}
