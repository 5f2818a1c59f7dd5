use thiserror::Error;

/// Errors produced by the segmentation toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: &'static str, found: String },
    #[error("unsupported format version: {0}")]
    Version(String),
    #[error("unsupported maxval {0} (only 255 is supported)")]
    MaxVal(u32),
    #[error("malformed header: {0}")]
    Header(String),
    #[error("truncated data: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("invalid dimensions {width}x{height}")]
    Dimensions { width: usize, height: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-numeric token {0:?}")]
    Token(String),
    #[error("value out of range: {0}")]
    Range(String),
    #[error("pixel ({x}, {y}) is outside a {width}x{height} image")]
    OutOfBounds { x: usize, y: usize, width: usize, height: usize },
    #[error("label map contains unprocessed (zero) labels")]
    ZeroLabel,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("noise would damage no pixels ({width}x{height} at p={p}%)")]
    NoDamage { width: usize, height: usize, p: f64 },
    #[error("seed pixel ({x}, {y}) is already labeled")]
    SeedLabeled { x: usize, y: usize },
    #[error("label {got} is not the next label {expected}")]
    Label { got: u32, expected: u32 },
}

pub type Result<T> = std::result::Result<T, Error>;
