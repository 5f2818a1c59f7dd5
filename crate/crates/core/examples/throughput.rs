//! Training throughput at the 256x256, p=10, 100-run scale.
//!
//! `cargo run --release -p seedseg-core --example throughput [f32|f64]`

use std::time::Instant;

use seedseg::image::{ImageRgb, Rgb};
use seedseg::perceptron::{Mlp, TrainConfig};
use seedseg::trainset::{build_training_set, NoiseConfig};
use seedseg::Scalar;

fn run<T: Scalar>(img: &ImageRgb) {
    let t = Instant::now();
    let samples = build_training_set::<T>(img, &NoiseConfig { p: 10.0, runs: 100, rng_seed: 1 }).unwrap();
    println!("{}: built {} samples in {:?}", std::any::type_name::<T>(), samples.len(), t.elapsed());
    let mlp = Mlp::<T>::init(50, 1).unwrap();
    let t = Instant::now();
    let cfg = TrainConfig { epochs: 1, learning_rate: 0.1, shuffle_seed: 1 };
    let (_, report) = mlp.train(&samples, &cfg).unwrap();
    let per_step = t.elapsed() / samples.len() as u32;
    println!("  one epoch {:?} ({per_step:?}/step), loss {:.3e}", t.elapsed(), report.final_mean_loss);
}

fn main() {
    let img = ImageRgb::from_fn(256, 256, |x, y| {
        let v = if (x / 64 + y / 64) % 2 == 0 { 40 } else { 210 };
        Rgb::new(v, (x as u8) / 4 + v / 2, (y as u8) / 4)
    })
    .unwrap();
    match std::env::args().nth(1).as_deref() {
        Some("f32") => run::<f32>(&img),
        _ => run::<f64>(&img),
    }
}
