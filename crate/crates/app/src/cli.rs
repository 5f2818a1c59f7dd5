//! `seedseg` command-line interface.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use seedseg::image::{load_ppm, overlay_mask, render_contours, save_ppm};
use seedseg::perceptron::{parse_model, serialize_model};
use seedseg::segmenter::segment_from_point;
use seedseg::trainset::{corrupt_impulse, samples_to_tsv};
use seedseg::{ImageRgb, LabelMap, Mlp64, PixelCoord, Rgb};

use crate::pipeline::{segment_image, train_model, PipelineConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "seedseg", version, about = "Single-image neural segmentation by region growing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the impulse-noise training set from an image and train a model
    Train(TrainArgs),
    /// Segment a whole image into a label map
    Auto(AutoArgs),
    /// Extract the single segment containing a pixel
    Grow(GrowArgs),
    /// Write one impulse-noise corrupted copy of an image
    Corrupt(CorruptArgs),
    /// Print the segment-size histogram of a label map
    Stats(StatsArgs),
    /// Serve the interactive HTTP API
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
struct NoiseArgs {
    /// Percentage of pixels damaged per noise run
    #[arg(long, default_value_t = 10.0)]
    noise_p: f64,
    /// RNG seed for this stage
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Source image (binary PPM)
    #[arg(short, long)]
    input: PathBuf,
    /// Model file to write (.msf)
    #[arg(short, long)]
    output: PathBuf,
    #[command(flatten)]
    noise: NoiseArgs,
    /// Number of noise runs
    #[arg(long, default_value_t = 100)]
    noise_runs: usize,
    /// Hidden layer size
    #[arg(long, default_value_t = 50)]
    hidden: usize,
    #[arg(long, default_value_t = 30)]
    epochs: usize,
    /// Learning rate
    #[arg(long, default_value_t = 0.1)]
    lr: f64,
    /// Also dump the training samples as TSV
    #[arg(long)]
    dump_samples: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AutoArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(short, long)]
    model: PathBuf,
    /// Label map to write (.smap)
    #[arg(short, long)]
    output: PathBuf,
    /// Also write the image with segment contours (PPM)
    #[arg(long)]
    contours: Option<PathBuf>,
    /// RNG seed for seed-pixel selection
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct GrowArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(short, long)]
    model: PathBuf,
    /// Seed pixel as `x,y` (0-based column, row)
    #[arg(long)]
    at: Coord,
    /// Mask to write (PBM P1)
    #[arg(short, long)]
    output: PathBuf,
    /// Also write the image with the segment highlighted (PPM)
    #[arg(long)]
    overlay: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CorruptArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    #[command(flatten)]
    noise: NoiseArgs,
    /// Noise run index; matches run N of `train` with the same seed
    #[arg(long, default_value_t = 0)]
    run: usize,
}

#[derive(Debug, Args)]
struct StatsArgs {
    /// Label map (.smap)
    #[arg(short, long)]
    input: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    /// Open a session with this image at startup
    #[arg(short, long)]
    pub input: Option<PathBuf>,
    /// Attach this model to the startup session
    #[arg(short, long, requires = "input")]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Coord(PixelCoord);

impl FromStr for Coord {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let (x, y) = s.split_once(',').ok_or_else(|| format!("expected x,y but got {s:?}"))?;
        let parse = |v: &str| v.trim().parse::<usize>().map_err(|_| format!("bad coordinate {v:?} in {s:?}"));
        Ok(Coord(PixelCoord::new(parse(x)?, parse(y)?)))
    }
}

/// Highlight color for `grow --overlay`.
const OVERLAY_COLOR: Rgb = Rgb::new(255, 200, 0);

pub fn read_image(path: &Path) -> Result<ImageRgb> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    load_ppm(&bytes).with_context(|| format!("parsing {}", path.display()))
}

pub fn read_model(path: &Path) -> Result<Mlp64> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    parse_model(&bytes).with_context(|| format!("parsing {}", path.display()))
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn train(args: TrainArgs, out: &mut dyn Write) -> Result<()> {
    let img = read_image(&args.input)?;
    let mut cfg = PipelineConfig::from_seed(args.noise.seed);
    cfg.noise.p = args.noise.noise_p;
    cfg.noise.runs = args.noise_runs;
    cfg.hidden_size = args.hidden;
    cfg.train.epochs = args.epochs;
    cfg.train.learning_rate = args.lr;
    if let Some(path) = &args.dump_samples {
        let samples = seedseg::trainset::build_training_set::<f64>(&img, &cfg.noise)?;
        write(path, samples_to_tsv(&samples))?;
    }
    let outcome = train_model(&img, &cfg, |p| {
        log::info!("epoch {}/{}: mean loss {:.6e}", p.epoch, p.epochs, p.mean_loss);
        std::ops::ControlFlow::Continue(())
    })?;
    write(&args.output, serialize_model(&outcome.model))?;
    writeln!(
        out,
        "trained on {} pairs, final mean loss {:.6e}, {:.1}s",
        outcome.pairs,
        outcome.report.final_mean_loss,
        outcome.elapsed.as_secs_f64()
    )?;
    Ok(())
}

fn auto(args: AutoArgs, out: &mut dyn Write) -> Result<()> {
    let img = read_image(&args.input)?;
    let model = read_model(&args.model)?;
    let lm = segment_image(&img, &model, args.seed);
    write(&args.output, lm.to_smap())?;
    if let Some(path) = &args.contours {
        write(path, save_ppm(&render_contours(&img, &lm)?))?;
    }
    writeln!(out, "{} segments", lm.max_label())?;
    Ok(())
}

fn grow(args: GrowArgs, out: &mut dyn Write) -> Result<()> {
    let img = read_image(&args.input)?;
    let model = read_model(&args.model)?;
    let (mask, _) = segment_from_point(&img, &model, args.at.0)?;
    write(&args.output, mask.to_pbm())?;
    if let Some(path) = &args.overlay {
        write(path, save_ppm(&overlay_mask(&img, mask.pixels(), OVERLAY_COLOR, 0.5)?))?;
    }
    writeln!(out, "segment at {} has {} pixels", args.at.0, mask.len())?;
    Ok(())
}

fn corrupt(args: CorruptArgs, out: &mut dyn Write) -> Result<()> {
    let img = read_image(&args.input)?;
    let mut noise = PipelineConfig::from_seed(args.noise.seed).noise;
    noise.p = args.noise.noise_p;
    let res = corrupt_impulse(&img, &noise, args.run)?;
    write(&args.output, save_ppm(&res.corrupted))?;
    writeln!(out, "damaged {} pixels", res.damaged.len())?;
    Ok(())
}

fn stats(args: StatsArgs, out: &mut dyn Write) -> Result<()> {
    let text = fs::read_to_string(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let lm = LabelMap::parse_smap(&text).with_context(|| format!("parsing {}", args.input.display()))?;
    let sizes = seedseg::segmenter::segment_stats(&lm);
    let unlabeled = sizes.get(&0).copied().unwrap_or(0);
    let mut histogram = std::collections::BTreeMap::new();
    for (_, &n) in sizes.iter().filter(|(&l, _)| l != 0) {
        *histogram.entry(n).or_insert(0usize) += 1;
    }
    writeln!(out, "segments: {}", sizes.len() - usize::from(unlabeled > 0))?;
    writeln!(out, "pixels: {}", lm.width() * lm.height())?;
    if unlabeled > 0 {
        writeln!(out, "unlabeled: {unlabeled}")?;
    }
    writeln!(out, "size\tcount")?;
    for (size, count) in histogram {
        writeln!(out, "{size}\t{count}")?;
    }
    Ok(())
}

fn execute(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Train(a) => train(a, out),
        Command::Auto(a) => auto(a, out),
        Command::Grow(a) => grow(a, out),
        Command::Corrupt(a) => corrupt(a, out),
        Command::Stats(a) => stats(a, out),
        Command::Serve(a) => crate::server::run_blocking(a),
    }
}

/// Runs the CLI and returns the process exit code: 0 on success, 2 on a
/// usage error, 1 when processing fails.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    match execute(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_FAILURE
        }
    }
}
