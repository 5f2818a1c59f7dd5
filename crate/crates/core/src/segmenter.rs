//! Region growing driven by a pair decider.
//!
//! A segment starts at a seed pixel. Each pixel admitted to the segment is
//! dequeued once and paired with every still-unlabeled 8-neighbor; the
//! decider sees the segment pixel first and the candidate second. Joined
//! candidates are labeled and queued. Growth stops when the queue drains.

use std::collections::{BTreeMap, VecDeque};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::image::{for_each_neighbor, ImageRgb, LabelMap, PixelCoord, Rgb, SegmentMask, NEIGHBORS_8};
use crate::perceptron::{Decision, Mlp};
use crate::scalar::Scalar;

/// Decides whether `candidate` joins the segment that contains `inside`.
///
/// Implementations must be deterministic.
pub trait PairDecider {
    fn decide(&self, inside: Rgb, candidate: Rgb) -> Decision;
}

impl<T: Scalar> PairDecider for Mlp<T> {
    fn decide(&self, inside: Rgb, candidate: Rgb) -> Decision {
        self.decide_pair(inside, candidate)
    }
}

impl<F: Fn(Rgb, Rgb) -> Decision> PairDecider for F {
    fn decide(&self, inside: Rgb, candidate: Rgb) -> Decision {
        self(inside, candidate)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct AlwaysJoin;

impl PairDecider for AlwaysJoin {
    fn decide(&self, _: Rgb, _: Rgb) -> Decision {
        Decision::Join
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct AlwaysReject;

impl PairDecider for AlwaysReject {
    fn decide(&self, _: Rgb, _: Rgb) -> Decision {
        Decision::Reject
    }
}

/// Joins when no channel differs by more than `max_diff`. Symmetric.
#[derive(Debug, Clone, Copy)]
pub struct ChannelThreshold {
    pub max_diff: u8,
}

impl PairDecider for ChannelThreshold {
    fn decide(&self, a: Rgb, b: Rgb) -> Decision {
        let close = a.channels().iter().zip(b.channels()).all(|(x, y)| x.abs_diff(y) <= self.max_diff);
        if close {
            Decision::Join
        } else {
            Decision::Reject
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GrowStats {
    /// Decider calls.
    pub evaluations: u64,
    /// Segments created.
    pub segments: usize,
    /// Pixel count per grown label.
    pub sizes: BTreeMap<u32, usize>,
}

/// Grows segment `label` from `seed` into the unlabeled part of `lm`.
/// Returns the number of pixels labeled.
pub fn grow_segment<D: PairDecider + ?Sized>(
    img: &ImageRgb,
    lm: &mut LabelMap,
    seed: PixelCoord,
    label: u32,
    decider: &D,
    stats: &mut GrowStats,
) -> Result<usize> {
    if img.width() != lm.width() || img.height() != lm.height() {
        return Err(Error::DimensionMismatch(format!(
            "image is {}x{}, label map is {}x{}",
            img.width(),
            img.height(),
            lm.width(),
            lm.height()
        )));
    }
    img.check_bounds(seed)?;
    if lm.get(seed) != 0 {
        return Err(Error::SeedLabeled { x: seed.x, y: seed.y });
    }
    let expected = lm.max_label() + 1;
    if label != expected {
        return Err(Error::Label { got: label, expected });
    }

    let (w, h) = (img.width(), img.height());
    let pixels = img.pixels();
    let start = img.index_of(seed);
    lm.assign(start, label);
    let mut queue = VecDeque::from([start]);
    let mut size = 1;
    let mut evaluations = 0u64;
    while let Some(v) = queue.pop_front() {
        for_each_neighbor(w, h, v, &NEIGHBORS_8, |u| {
            if lm.at_index(u) != 0 {
                return;
            }
            evaluations += 1;
            if decider.decide(pixels[v], pixels[u]) == Decision::Join {
                lm.assign(u, label);
                queue.push_back(u);
                size += 1;
            }
        });
    }
    stats.evaluations += evaluations;
    stats.segments += 1;
    stats.sizes.insert(label, size);
    Ok(size)
}

/// Full segmentation: seeds are drawn uniformly from the unlabeled pixels
/// until none remain. Labels come out as `1..=k`.
pub fn segment_auto<D: PairDecider + ?Sized>(img: &ImageRgb, decider: &D, rng_seed: u64) -> (LabelMap, GrowStats) {
    let mut lm = LabelMap::new(img.width(), img.height()).expect("image dimensions are positive");
    let mut stats = GrowStats::default();
    // Walking a seeded permutation and skipping labeled pixels picks each
    // seed uniformly among the pixels still unlabeled at that moment.
    let mut order: Vec<usize> = (0..img.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(rng_seed));
    for idx in order {
        if lm.at_index(idx) != 0 {
            continue;
        }
        let label = lm.max_label() + 1;
        grow_segment(img, &mut lm, img.coord_of(idx), label, decider, &mut stats)
            .expect("seed is unlabeled and label is next");
    }
    (lm, stats)
}

/// Interactive mode: the single segment containing `at`.
pub fn segment_from_point<D: PairDecider + ?Sized>(
    img: &ImageRgb,
    decider: &D,
    at: PixelCoord,
) -> Result<(SegmentMask, GrowStats)> {
    img.check_bounds(at)?;
    let mut lm = LabelMap::new(img.width(), img.height())?;
    let mut stats = GrowStats::default();
    grow_segment(img, &mut lm, at, 1, decider, &mut stats)?;
    let mask = SegmentMask::new(img.width(), img.height(), lm.pixels_with(1))?;
    Ok((mask, stats))
}

/// Pixel count per label, including 0 when present.
pub fn segment_stats(lm: &LabelMap) -> BTreeMap<u32, usize> {
    lm.sizes()
}
