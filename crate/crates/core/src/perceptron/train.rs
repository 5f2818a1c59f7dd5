//! Backpropagation: per-sample gradients and seeded stochastic gradient descent.

use std::ops::ControlFlow;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Mlp, Sample, OUTPUTS};
use crate::alloc::with_huge_capacity;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub shuffle_seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { epochs: 30, learning_rate: 0.1, shuffle_seed: 0 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::Config(format!("learning rate {} must be positive", self.learning_rate)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainReport {
    pub epochs_run: usize,
    /// Mean per-sample loss over the last epoch, measured before each update.
    pub final_mean_loss: f64,
    pub samples: usize,
}

/// Parameter gradients laid out like [`Mlp`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<T> {
    pub w1: Vec<T>,
    pub b1: Vec<T>,
    pub w2: Vec<T>,
    pub b2: [T; OUTPUTS],
}

impl<T: Scalar> Gradients<T> {
    /// Flattened in the same order as [`Mlp::params`].
    pub fn flat(&self) -> Vec<T> {
        self.w1.iter().chain(&self.b1).chain(&self.w2).chain(&self.b2).copied().collect()
    }
}

/// Reusable per-step buffers.
struct Scratch<T> {
    hidden: Vec<T>,
    delta_hidden: Vec<T>,
}

impl<T: Scalar> Scratch<T> {
    fn new(hidden: usize) -> Self {
        Self { hidden: vec![T::zero(); hidden], delta_hidden: vec![T::zero(); hidden] }
    }
}

impl<T: Scalar> Mlp<T> {
    /// Squared-error loss `0.5 * sum_k (out_k - target_k)^2`, the mean over
    /// the two outputs.
    pub fn loss(&self, sample: &Sample<T>) -> T {
        let (j, r) = self.forward(&sample.input);
        squared_error([j, r], sample.target.target())
    }

    /// Returns the loss and output deltas, leaving the hidden activations
    /// and deltas in `scratch`. Must run before any weight changes.
    #[inline(always)]
    fn backprop_into(&self, sample: &Sample<T>, scratch: &mut Scratch<T>) -> (T, [T; OUTPUTS]) {
        let out = self.forward_into(&sample.input, &mut scratch.hidden);
        let target = sample.target.target::<T>();
        let loss = squared_error(out, target);
        let one = T::one();
        let delta_out = [
            (out[0] - target[0]) * out[0] * (one - out[0]),
            (out[1] - target[1]) * out[1] * (one - out[1]),
        ];
        let (row0, row1) = self.w2.split_at(self.hidden);
        for (((d, h), w0), w1) in scratch.delta_hidden.iter_mut().zip(&scratch.hidden).zip(row0).zip(row1) {
            *d = (*w0 * delta_out[0] + *w1 * delta_out[1]) * *h * (one - *h);
        }
        (loss, delta_out)
    }

    /// Analytic gradient of [`Mlp::loss`] for one sample, laid out like the
    /// model's parameters.
    pub fn gradients(&self, sample: &Sample<T>) -> (T, Gradients<T>) {
        let mut scratch = Scratch::new(self.hidden);
        let (loss, delta_out) = self.backprop_into(sample, &mut scratch);
        let mut w1 = Vec::with_capacity(self.w1.len());
        for x in sample.input {
            w1.extend(scratch.delta_hidden.iter().map(|d| *d * x));
        }
        let mut w2 = Vec::with_capacity(self.w2.len());
        for d in delta_out {
            w2.extend(scratch.hidden.iter().map(|h| d * *h));
        }
        (loss, Gradients { w1, b1: scratch.delta_hidden, w2, b2: delta_out })
    }

    /// One gradient-descent step on a single sample; returns the loss
    /// before the update.
    pub fn sgd_step(&mut self, sample: &Sample<T>, learning_rate: T) -> T {
        let mut scratch = Scratch::new(self.hidden);
        self.step_with(sample, learning_rate, &mut scratch)
    }

    #[inline(always)]
    fn step_with(&mut self, sample: &Sample<T>, lr: T, scratch: &mut Scratch<T>) -> T {
        let (loss, delta_out) = self.backprop_into(sample, scratch);
        for (row, d) in self.w2.chunks_exact_mut(self.hidden).zip(delta_out) {
            axpy(row, -(lr * d), &scratch.hidden);
        }
        self.b2[0] -= lr * delta_out[0];
        self.b2[1] -= lr * delta_out[1];
        for (col, x) in self.w1.chunks_exact_mut(self.hidden).zip(&sample.input) {
            axpy(col, -(lr * *x), &scratch.delta_hidden);
        }
        axpy(&mut self.b1, -lr, &scratch.delta_hidden);
        loss
    }

    /// Per-sample SGD over `samples`, reshuffled every epoch with a
    /// generator seeded from `cfg.shuffle_seed`. Returns the trained copy.
    pub fn train(&self, samples: &[Sample<T>], cfg: &TrainConfig) -> Result<(Mlp<T>, TrainReport)> {
        self.train_with_progress(samples, cfg, |_| ControlFlow::Continue(()))
    }

    /// [`Mlp::train`] with a callback after every epoch. Returning
    /// `Break` stops training; the report then counts completed epochs only.
    pub fn train_with_progress(
        &self,
        samples: &[Sample<T>],
        cfg: &TrainConfig,
        mut on_epoch: impl FnMut(&EpochProgress) -> ControlFlow<()>,
    ) -> Result<(Mlp<T>, TrainReport)> {
        cfg.validate()?;
        let mut model = self.clone();
        if samples.is_empty() {
            return Ok((model, TrainReport { epochs_run: 0, final_mean_loss: 0.0, samples: 0 }));
        }
        let lr = T::lit(cfg.learning_rate);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.shuffle_seed);
        let mut order = with_huge_capacity(samples.len());
        order.extend(0..samples.len());
        let mut scratch = Scratch::new(model.hidden);
        let mut report = TrainReport { epochs_run: 0, final_mean_loss: 0.0, samples: samples.len() };
        for epoch in 1..=cfg.epochs {
            order.shuffle(&mut rng);
            let total = run_epoch(&mut model, samples, &order, lr, &mut scratch);
            report.epochs_run = epoch;
            report.final_mean_loss = total / samples.len() as f64;
            let progress = EpochProgress { epoch, epochs: cfg.epochs, mean_loss: report.final_mean_loss };
            if on_epoch(&progress).is_break() {
                break;
            }
        }
        Ok((model, report))
    }
}

/// One SGD pass in `order`; returns the summed pre-update loss.
///
/// The step kernels are inlined here, so on x86-64 CPUs with AVX2 the whole
/// pass is compiled a second time for wider vectors. The kernels avoid
/// fused multiply-adds and fix their reduction order, so both builds
/// produce identical bits.
fn run_epoch<T: Scalar>(model: &mut Mlp<T>, samples: &[Sample<T>], order: &[usize], lr: T, scratch: &mut Scratch<T>) -> f64 {
    let _ftz = FlushSubnormals::enable();
    #[cfg(target_arch = "x86_64")]
    if std::is_x86_feature_detected!("avx2") {
        // SAFETY: AVX2 support was just checked.
        return unsafe { run_epoch_avx2(model, samples, order, lr, scratch) };
    }
    epoch_body(model, samples, order, lr, scratch)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn run_epoch_avx2<T: Scalar>(
    model: &mut Mlp<T>,
    samples: &[Sample<T>],
    order: &[usize],
    lr: T,
    scratch: &mut Scratch<T>,
) -> f64 {
    epoch_body(model, samples, order, lr, scratch)
}

/// Flushes subnormal inputs and results to zero until dropped.
///
/// Once the network saturates, gradient terms routinely underflow into the
/// subnormal range, where x86 arithmetic is one to two orders of magnitude
/// slower. Such terms are far below the rounding step of any weight they
/// would be added to.
struct FlushSubnormals {
    #[cfg(target_arch = "x86_64")]
    saved: u32,
}

#[cfg(target_arch = "x86_64")]
impl FlushSubnormals {
    /// MXCSR flush-to-zero and denormals-are-zero bits.
    const FTZ_DAZ: u32 = 0x8040;

    fn enable() -> Self {
        let saved = read_mxcsr();
        write_mxcsr(saved | Self::FTZ_DAZ);
        Self { saved }
    }
}

#[cfg(not(target_arch = "x86_64"))]
impl FlushSubnormals {
    fn enable() -> Self {
        Self {}
    }
}

#[cfg(target_arch = "x86_64")]
impl Drop for FlushSubnormals {
    fn drop(&mut self) {
        write_mxcsr(self.saved);
    }
}

#[cfg(target_arch = "x86_64")]
fn read_mxcsr() -> u32 {
    let mut value = 0u32;
    // SAFETY: stores the SSE control register into a local.
    unsafe { std::arch::asm!("stmxcsr [{}]", in(reg) &mut value, options(nostack, preserves_flags)) };
    value
}

#[cfg(target_arch = "x86_64")]
fn write_mxcsr(value: u32) {
    // SAFETY: only the subnormal-handling bits differ from the saved state.
    unsafe { std::arch::asm!("ldmxcsr [{}]", in(reg) &value, options(nostack, preserves_flags, readonly)) };
}

#[inline(always)]
fn epoch_body<T: Scalar>(model: &mut Mlp<T>, samples: &[Sample<T>], order: &[usize], lr: T, scratch: &mut Scratch<T>) -> f64 {
    let mut total = 0.0f64;
    for (k, &i) in order.iter().enumerate() {
        if let Some(&ahead) = order.get(k + PREFETCH_DISTANCE) {
            prefetch(&samples[ahead]);
        }
        total += model.step_with(&samples[i], lr, scratch).widen();
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochProgress {
    /// 1-based index of the epoch just finished.
    pub epoch: usize,
    pub epochs: usize,
    pub mean_loss: f64,
}

/// `y += a * x`
#[inline(always)]
fn axpy<T: Scalar>(y: &mut [T], a: T, x: &[T]) {
    for (y, x) in y.iter_mut().zip(x) {
        *y += a * *x;
    }
}

/// How many shuffled samples ahead to pull into cache. Sample order is
/// random, so without this nearly every step waits on main memory.
const PREFETCH_DISTANCE: usize = 16;

/// Requests both ends of `item`, which usually straddles two cache lines.
#[inline(always)]
fn prefetch<S>(item: &S) {
    #[cfg(target_arch = "x86_64")]
    // SAFETY: prefetching is a hint and never faults, even for invalid addresses.
    unsafe {
        use std::arch::x86_64::{_mm_prefetch, _MM_HINT_T0};
        let first = (item as *const S).cast::<i8>();
        _mm_prefetch::<_MM_HINT_T0>(first);
        _mm_prefetch::<_MM_HINT_T0>(first.wrapping_add(std::mem::size_of::<S>() - 1));
    }
    #[cfg(not(target_arch = "x86_64"))]
    let _ = item;
}

#[inline]
fn squared_error<T: Scalar>(out: [T; OUTPUTS], target: [T; OUTPUTS]) -> T {
    let (e0, e1) = (out[0] - target[0], out[1] - target[1]);
    T::lit(0.5) * (e0 * e0 + e1 * e1)
}
