//! Self-supervised training data from a single image.
//!
//! Each run replaces a random `p%` of the pixels with colors from the
//! opposite half of the palette. Every (damaged pixel, 8-neighbor) pair
//! yields reject samples from the corrupted colors and join samples from
//! the original colors at the same locations, in both orders.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::alloc::with_huge_capacity;
use crate::image::{for_each_neighbor, ImageRgb, PixelCoord, Rgb, NEIGHBORS_8, PALETTE_DEPTH};
use crate::perceptron::{Decision, Sample};
use crate::scalar::Scalar;

/// Largest damage percentage that still produces a usable training set.
pub const RECOMMENDED_MAX_P: f64 = 10.0;

const HALF: u8 = (PALETTE_DEPTH / 2) as u8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseConfig {
    /// Percentage of pixels damaged per run.
    pub p: f64,
    pub runs: usize,
    pub rng_seed: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self { p: 10.0, runs: 100, rng_seed: 0 }
    }
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.p.is_finite() && self.p > 0.0 && self.p <= 100.0) {
            return Err(Error::Config(format!("noise percentage {} must be in (0, 100]", self.p)));
        }
        if self.runs == 0 {
            return Err(Error::Config("noise runs must be at least 1".into()));
        }
        if self.p > RECOMMENDED_MAX_P {
            log::warn!("noise percentage {}% exceeds {RECOMMENDED_MAX_P}%; training quality may suffer", self.p);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorruptionResult {
    pub corrupted: ImageRgb,
    /// Damaged pixels in selection order.
    pub damaged: Vec<PixelCoord>,
}

/// `floor(p * pixels / 100)`.
pub fn damaged_count(pixels: usize, p: f64) -> usize {
    (p * pixels as f64 / 100.0).floor() as usize
}

/// Replacement for one channel value: values above half the palette map
/// into `[0, 127]`, the rest into `[129, 255]`.
#[inline]
pub fn opposite_half(value: u8, rng: &mut impl Rng) -> u8 {
    if value > HALF {
        rng.gen_range(0..HALF)
    } else {
        rng.gen_range(HALF + 1..=u8::MAX)
    }
}

/// Generator for one corruption run. Stream 0 is reserved for the final
/// sample shuffle.
fn run_rng(seed: u64, run_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run_index as u64 + 1);
    rng
}

pub fn corrupt_impulse(img: &ImageRgb, cfg: &NoiseConfig, run_index: usize) -> Result<CorruptionResult> {
    cfg.validate()?;
    let count = damaged_count(img.len(), cfg.p);
    if count == 0 {
        return Err(Error::NoDamage { width: img.width(), height: img.height(), p: cfg.p });
    }
    let mut rng = run_rng(cfg.rng_seed, run_index);
    let mut indices: Vec<usize> = (0..img.len()).collect();
    let (chosen, _) = indices.partial_shuffle(&mut rng, count);
    let mut corrupted = img.clone();
    let mut damaged = Vec::with_capacity(count);
    for &i in chosen.iter() {
        let old = img.pixels()[i];
        corrupted.pixels_mut()[i] = Rgb::from_channels(old.channels().map(|v| opposite_half(v, &mut rng)));
        damaged.push(img.coord_of(i));
    }
    Ok(CorruptionResult { corrupted, damaged })
}

/// Appends the four samples for one (damaged, neighbor) location pair.
#[inline]
fn push_pair<T: Scalar>(out: &mut Vec<Sample<T>>, corrupted: (Rgb, Rgb), original: (Rgb, Rgb)) {
    let (dc, uc) = corrupted;
    let (d, u) = original;
    out.push(Sample::from_pair(uc, dc, Decision::Reject));
    out.push(Sample::from_pair(dc, uc, Decision::Reject));
    out.push(Sample::from_pair(u, d, Decision::Join));
    out.push(Sample::from_pair(d, u, Decision::Join));
}

pub fn build_training_set<T: Scalar>(img: &ImageRgb, cfg: &NoiseConfig) -> Result<Vec<Sample<T>>> {
    if img.len() < 2 {
        return Err(Error::Dimensions { width: img.width(), height: img.height() });
    }
    cfg.validate()?;
    let per_run_bound = damaged_count(img.len(), cfg.p) * NEIGHBORS_8.len() * 4;
    let mut samples = with_huge_capacity(per_run_bound * cfg.runs);
    for run in 0..cfg.runs {
        let CorruptionResult { corrupted, damaged } = corrupt_impulse(img, cfg, run)?;
        let (orig, noisy) = (img.pixels(), corrupted.pixels());
        for d in damaged {
            let di = img.index_of(d);
            for_each_neighbor(img.width(), img.height(), di, &NEIGHBORS_8, |ui| {
                push_pair(&mut samples, (noisy[di], noisy[ui]), (orig[di], orig[ui]));
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    rng.set_stream(0);
    samples.shuffle(&mut rng);
    Ok(samples)
}

/// Debug dump: one line per sample, six inputs then `J` or `R`.
pub fn samples_to_tsv<T: Scalar>(samples: &[Sample<T>]) -> String {
    let mut out = String::with_capacity(samples.len() * 48);
    for s in samples {
        for v in s.input {
            out.push_str(&v.widen().to_string());
            out.push('\t');
        }
        out.push_str(match s.target {
            Decision::Join => "J\n",
            Decision::Reject => "R\n",
        });
    }
    out
}
