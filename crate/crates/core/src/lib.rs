//! Single-image neural segmentation.
//!
//! A training set is synthesized from the image itself by impulse-noise
//! corruption ([`trainset`]); a 6-H-2 perceptron ([`perceptron`]) learns
//! to tell whether two adjacent pixels belong together; region growing
//! ([`segmenter`]) then labels the whole image or extracts the segment
//! around one chosen point.
//!
//! Network math is generic over [`Scalar`] (`f32`/`f64`); the aliases
//! below name the common instantiations.

mod alloc;
pub mod error;
pub mod image;
pub mod perceptron;
pub mod scalar;
pub mod segmenter;
pub mod trainset;

pub use error::{Error, Result};
pub use image::{ImageRgb, LabelMap, PixelCoord, Rgb, SegmentMask};
pub use perceptron::{Decision, Mlp, Sample, TrainConfig, TrainReport};
pub use scalar::Scalar;
pub use segmenter::{GrowStats, PairDecider};
pub use trainset::{CorruptionResult, NoiseConfig};

pub type Mlp64 = Mlp<f64>;
pub type Mlp32 = Mlp<f32>;
pub type Sample64 = Sample<f64>;
pub type Sample32 = Sample<f32>;
