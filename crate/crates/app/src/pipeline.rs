//! The end-to-end training pipeline shared by the CLI and the HTTP service.

use std::ops::ControlFlow;
use std::time::{Duration, Instant};

use seedseg::perceptron::{EpochProgress, DEFAULT_HIDDEN};
use seedseg::trainset::build_training_set;
use seedseg::{ImageRgb, LabelMap, Mlp64, NoiseConfig, Result, TrainConfig, TrainReport};

/// Stage salts for deriving per-stage seeds from one user seed.
const NOISE_SALT: u64 = 0x9E37_79B9_7F4A_7C15;
const INIT_SALT: u64 = 0xD1B5_4A32_D192_ED03;
const SHUFFLE_SALT: u64 = 0x8CB9_2BA7_2F3D_8DD7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    pub noise: NoiseConfig,
    pub train: TrainConfig,
    pub hidden_size: usize,
    pub init_seed: u64,
    pub auto_seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self::from_seed(0)
    }
}

impl PipelineConfig {
    /// Defaults (p = 10%, 100 runs, 50 hidden units, 30 epochs, rate 0.1)
    /// with noise, initialization and shuffling seeds derived from `seed`.
    pub fn from_seed(seed: u64) -> Self {
        Self {
            noise: NoiseConfig { rng_seed: seed ^ NOISE_SALT, ..NoiseConfig::default() },
            train: TrainConfig { shuffle_seed: seed ^ SHUFFLE_SALT, ..TrainConfig::default() },
            hidden_size: DEFAULT_HIDDEN,
            init_seed: seed ^ INIT_SALT,
            auto_seed: seed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: Mlp64,
    pub report: TrainReport,
    /// Training samples (pair vectors) generated.
    pub pairs: usize,
    pub elapsed: Duration,
}

/// Builds the impulse-noise training set from `img` and trains a fresh model.
pub fn train_model(
    img: &ImageRgb,
    cfg: &PipelineConfig,
    on_epoch: impl FnMut(&EpochProgress) -> ControlFlow<()>,
) -> Result<TrainOutcome> {
    let start = Instant::now();
    cfg.train.validate()?;
    let init = Mlp64::init(cfg.hidden_size, cfg.init_seed)?;
    let samples = build_training_set::<f64>(img, &cfg.noise)?;
    log::info!("built {} training samples in {:.1?}", samples.len(), start.elapsed());
    let (model, report) = init.train_with_progress(&samples, &cfg.train, on_epoch)?;
    Ok(TrainOutcome { model, report, pairs: samples.len(), elapsed: start.elapsed() })
}

/// Automatic segmentation with the model as pair decider.
pub fn segment_image(img: &ImageRgb, model: &Mlp64, rng_seed: u64) -> LabelMap {
    seedseg::segmenter::segment_auto(img, model, rng_seed).0
}
