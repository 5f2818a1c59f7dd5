#![allow(dead_code)]

use std::path::{Path, PathBuf};

use seedseg::image::save_ppm;
use seedseg::{ImageRgb, Rgb};

pub const DARK: Rgb = Rgb::new(30, 30, 30);
pub const LIGHT: Rgb = Rgb::new(220, 220, 220);

/// Left half dark, right half light.
pub fn two_region(width: usize, height: usize) -> ImageRgb {
    ImageRgb::from_fn(width, height, |x, _| if x < width / 2 { DARK } else { LIGHT }).unwrap()
}

pub fn write_ppm(dir: &Path, name: &str, img: &ImageRgb) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, save_ppm(img)).unwrap();
    path
}

/// Small, fast training settings shared by the CLI and HTTP tests.
pub const QUICK_TRAIN: [&str; 8] = ["--noise-runs", "3", "--hidden", "8", "--epochs", "4", "--lr", "0.2"];

/// Runs the CLI in-process and returns (exit code, stdout).
pub fn cli(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let argv = std::iter::once("seedseg").chain(args.iter().copied());
    let code = seedseg_app::run_cli(argv, &mut out);
    (code, String::from_utf8(out).unwrap())
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}
