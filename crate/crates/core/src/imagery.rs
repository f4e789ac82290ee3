//! Grayscale image loading, quantization and microimage counting.
//!
//! The per-image pipeline winsorizes both tails of the intensity histogram,
//! applies `v ↦ log(1 + v)`, then quantizes the dynamic range into `L`
//! equal-width bins. Every overlapping `n × n` patch of the quantized image
//! is mapped to a point of the microimage lattice and counted.
//!
//! Patch coordinates: for `n = 2` the four pixels are read
//! counterclockwise from the top right (`x1` = top right, `x2` = top left,
//! `x3` = bottom left, `x4` = bottom right), so the cyclic generator of the
//! microimage group rotates the patch by a quarter turn. Larger patches are
//! read in row-major order.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distribution::Distribution;
use crate::lattice::LatticeSpace;

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("file truncated: expected {expected} bytes of pixel data, found {found}")]
    TruncatedFile { expected: usize, found: usize },
    #[error("bad dimensions: {0}")]
    BadDimensions(String),
    #[error("level {level} at ({row}, {col}) is outside 0..{levels}")]
    LevelOutOfRange { row: usize, col: usize, level: u16, levels: usize },
    #[error("invalid preprocessing configuration: {0}")]
    Config(String),
    #[error("no images to aggregate")]
    EmptyList,
    #[error("count vectors differ in length ({expected} vs {got})")]
    InconsistentK { expected: usize, got: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageGray {
    width: usize,
    height: usize,
    /// Row-major pixel values.
    pixels: Vec<u16>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Endian {
    Big,
    Little,
}

impl ImageGray {
    pub fn new(width: usize, height: usize, pixels: Vec<u16>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::BadDimensions(format!("{width}x{height}")));
        }
        if pixels.len() != width * height {
            return Err(ImageError::BadDimensions(format!(
                "{width}x{height} image with {} pixels",
                pixels.len()
            )));
        }
        Ok(Self { width, height, pixels })
    }

    /// Builds an image from rows of equal length.
    pub fn from_rows(rows: &[Vec<u16>]) -> Result<Self, ImageError> {
        let width = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != width) {
            return Err(ImageError::BadDimensions("ragged rows".into()));
        }
        Self::new(width, rows.len(), rows.concat())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u16] {
        &self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> u16 {
        self.pixels[row * self.width + col]
    }

    pub fn rows(&self) -> Vec<Vec<u16>> {
        self.pixels.chunks(self.width).map(<[u16]>::to_vec).collect()
    }

    /// Parses a binary (P5) or plain (P2) PGM with maxval up to 65535.
    pub fn parse_pgm(bytes: &[u8]) -> Result<Self, ImageError> {
        let mut pos = 0;
        let magic = next_token(bytes, &mut pos).ok_or_else(|| ImageError::Parse("empty file".into()))?;
        let binary = match magic.as_str() {
            "P5" => true,
            "P2" => false,
            other => return Err(ImageError::Parse(format!("unsupported magic {other:?}"))),
        };
        let mut header = [0usize; 3];
        for (slot, name) in header.iter_mut().zip(["width", "height", "maxval"]) {
            let tok = next_token(bytes, &mut pos).ok_or_else(|| ImageError::Parse(format!("missing {name}")))?;
            *slot = tok
                .parse()
                .map_err(|_| ImageError::Parse(format!("bad {name} {tok:?}")))?;
        }
        let [width, height, maxval] = header;
        if maxval == 0 || maxval > 65535 {
            return Err(ImageError::Parse(format!("maxval {maxval} outside 1..=65535")));
        }
        let count = width
            .checked_mul(height)
            .ok_or_else(|| ImageError::BadDimensions(format!("{width}x{height}")))?;
        let mut pixels = Vec::with_capacity(count);
        if binary {
            // exactly one whitespace byte separates the header from the raster
            pos += 1;
            let bpp = if maxval > 255 { 2 } else { 1 };
            let data = bytes.get(pos..).unwrap_or(&[]);
            if data.len() < count * bpp {
                return Err(ImageError::TruncatedFile {
                    expected: count * bpp,
                    found: data.len(),
                });
            }
            if bpp == 1 {
                pixels.extend(data[..count].iter().map(|&b| u16::from(b)));
            } else {
                pixels.extend(data[..2 * count].chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])));
            }
        } else {
            for i in 0..count {
                let tok = next_token(bytes, &mut pos).ok_or(ImageError::TruncatedFile {
                    expected: count,
                    found: i,
                })?;
                let v: u32 = tok.parse().map_err(|_| ImageError::Parse(format!("bad sample {tok:?}")))?;
                if v as usize > maxval {
                    return Err(ImageError::Parse(format!("sample {v} exceeds maxval {maxval}")));
                }
                pixels.push(v as u16);
            }
        }
        if pixels.iter().any(|&v| v as usize > maxval) {
            return Err(ImageError::Parse(format!("sample exceeds maxval {maxval}")));
        }
        Self::new(width, height, pixels)
    }

    /// Parses headerless 16-bit samples.
    pub fn parse_raw16(bytes: &[u8], width: usize, height: usize, endian: Endian) -> Result<Self, ImageError> {
        let count = width
            .checked_mul(height)
            .ok_or_else(|| ImageError::BadDimensions(format!("{width}x{height}")))?;
        if bytes.len() < 2 * count {
            return Err(ImageError::TruncatedFile {
                expected: 2 * count,
                found: bytes.len(),
            });
        }
        let pixels = bytes[..2 * count]
            .chunks_exact(2)
            .map(|c| match endian {
                Endian::Big => u16::from_be_bytes([c[0], c[1]]),
                Endian::Little => u16::from_le_bytes([c[0], c[1]]),
            })
            .collect();
        Self::new(width, height, pixels)
    }

    pub fn load_pgm(path: &Path) -> Result<Self, ImageError> {
        Self::parse_pgm(&std::fs::read(path)?)
    }

    pub fn load_raw16(path: &Path, width: usize, height: usize, endian: Endian) -> Result<Self, ImageError> {
        Self::parse_raw16(&std::fs::read(path)?, width, height, endian)
    }

    /// Binary PGM with the smallest sample width that holds every pixel.
    pub fn to_pgm(&self) -> Vec<u8> {
        let maxval = self.pixels.iter().copied().max().unwrap_or(0).max(1);
        let mut out = format!("P5\n{} {}\n{}\n", self.width, self.height, maxval).into_bytes();
        if maxval > 255 {
            out.extend(self.pixels.iter().flat_map(|v| v.to_be_bytes()));
        } else {
            out.extend(self.pixels.iter().map(|&v| v as u8));
        }
        out
    }

    pub fn write_pgm(&self, path: &Path) -> Result<(), ImageError> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(&self.to_pgm())?;
        Ok(())
    }
}

/// Next whitespace-delimited token, skipping `#` comments.
fn next_token(bytes: &[u8], pos: &mut usize) -> Option<String> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    (start < *pos).then(|| String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PreprocessConfig {
    /// Fraction of pixels winsorized in each tail.
    pub clip_fraction: f64,
    pub log_transform: bool,
    pub levels: usize,
    pub patch: usize,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            clip_fraction: 0.005,
            log_transform: true,
            levels: 4,
            patch: 2,
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<(), ImageError> {
        if !(0.0..0.5).contains(&self.clip_fraction) {
            return Err(ImageError::Config(format!(
                "clip fraction {} outside [0, 0.5)",
                self.clip_fraction
            )));
        }
        if self.levels < 2 || self.levels > u16::MAX as usize {
            return Err(ImageError::Config(format!("levels {} must be at least 2", self.levels)));
        }
        if self.patch == 0 {
            return Err(ImageError::Config("patch size must be positive".into()));
        }
        Ok(())
    }
}

/// An image with pixel values in `0..levels`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantizedImage {
    pub image: ImageGray,
    pub levels: usize,
    /// Set when the image had no dynamic range after clipping.
    pub constant: bool,
}

impl ImageGray {
    /// Quarter turn counterclockwise.
    pub fn rotate_ccw(&self) -> Self {
        let (w, h) = (self.width, self.height);
        let pixels = (0..w)
            .flat_map(|r| (0..h).map(move |c| (r, c)))
            .map(|(r, c)| self.get(c, w - 1 - r))
            .collect();
        Self {
            width: h,
            height: w,
            pixels,
        }
    }

    /// Mirror across the vertical axis.
    pub fn flip_horizontal(&self) -> Self {
        let pixels = self
            .pixels
            .chunks(self.width)
            .flat_map(|row| row.iter().rev().copied())
            .collect();
        Self {
            pixels,
            ..self.clone()
        }
    }
}

impl QuantizedImage {
    /// The level-reversed image `v ↦ L - 1 - v`.
    pub fn inverted(&self) -> Self {
        let top = (self.levels - 1) as u16;
        let pixels = self.image.pixels().iter().map(|&v| top - v).collect();
        Self {
            image: ImageGray::new(self.image.width(), self.image.height(), pixels).expect("same shape"),
            ..self.clone()
        }
    }

    /// The eight rotations and reflections of the image, each with and
    /// without level inversion.
    pub fn symmetric_variants(&self) -> Vec<Self> {
        let mut geometric = Vec::with_capacity(8);
        let mut img = self.image.clone();
        for _ in 0..4 {
            geometric.push(img.clone());
            geometric.push(img.flip_horizontal());
            img = img.rotate_ccw();
        }
        geometric
            .into_iter()
            .flat_map(|image| {
                let q = Self { image, ..self.clone() };
                let inv = q.inverted();
                [q, inv]
            })
            .collect()
    }
}

/// Pixel values at the lower and upper clipping quantiles.
pub fn clip_bounds(pixels: &[u16], fraction: f64) -> (u16, u16) {
    let mut sorted = pixels.to_vec();
    sorted.sort_unstable();
    let n = sorted.len();
    let need = ((fraction * n as f64).ceil() as usize).clamp(1, n);
    // smallest v with #{≤ v} ≥ need, largest v with #{≥ v} ≥ need
    (sorted[need - 1], sorted[n - need])
}

pub fn preprocess(img: &ImageGray, cfg: &PreprocessConfig) -> Result<QuantizedImage, ImageError> {
    cfg.validate()?;
    let (lo, hi) = clip_bounds(img.pixels(), cfg.clip_fraction);
    let transform = |v: u16| -> f64 {
        let v = f64::from(v.clamp(lo, hi));
        if cfg.log_transform {
            v.ln_1p()
        } else {
            v
        }
    };
    let values: Vec<f64> = img.pixels().iter().map(|&v| transform(v)).collect();
    let (min, max) = (transform(lo), transform(hi));
    let constant = max <= min;
    let top = (cfg.levels - 1) as u16;
    let levels = values
        .iter()
        .map(|&v| {
            if constant {
                0
            } else {
                let bin = ((v - min) / (max - min) * cfg.levels as f64).floor();
                (bin.max(0.0) as u16).min(top)
            }
        })
        .collect();
    Ok(QuantizedImage {
        image: ImageGray::new(img.width(), img.height(), levels)?,
        levels: cfg.levels,
        constant,
    })
}

/// Pixel offsets `(row, col)` of patch coordinates `x1..x_{n²}`.
pub fn patch_layout(n: usize) -> Vec<(usize, usize)> {
    if n == 2 {
        vec![(0, 1), (0, 0), (1, 0), (1, 1)]
    } else {
        (0..n * n).map(|i| (i / n, i % n)).collect()
    }
}

/// Microimage counts of one image.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PatchCounts {
    pub counts: Vec<u64>,
    pub total: u64,
}

impl PatchCounts {
    pub fn frequencies(&self) -> Distribution {
        Distribution::from_counts(&self.counts).expect("at least one patch")
    }
}

pub fn extract_counts(q: &QuantizedImage, n: usize, space: &LatticeSpace) -> Result<PatchCounts, ImageError> {
    let img = &q.image;
    if n == 0 || img.width() < n || img.height() < n {
        return Err(ImageError::BadDimensions(format!(
            "{}x{} image with {n}x{n} patches",
            img.width(),
            img.height()
        )));
    }
    if space.dimension() != n * n || space.levels() != Some(q.levels) {
        return Err(ImageError::BadDimensions(format!(
            "lattice of dimension {} does not hold {n}x{n} patches with {} levels",
            space.dimension(),
            q.levels
        )));
    }
    for row in 0..img.height() {
        for col in 0..img.width() {
            let level = img.get(row, col);
            if level as usize >= q.levels {
                return Err(ImageError::LevelOutOfRange {
                    row,
                    col,
                    level,
                    levels: q.levels,
                });
            }
        }
    }
    let layout = patch_layout(n);
    let mut counts = vec![0u64; space.len()];
    let mut levels = vec![0usize; n * n];
    for row in 0..=img.height() - n {
        for col in 0..=img.width() - n {
            for (slot, &(dr, dc)) in levels.iter_mut().zip(&layout) {
                *slot = img.get(row + dr, col + dc) as usize;
            }
            let k = space.index_of_levels(&levels).expect("levels checked");
            counts[k] += 1;
        }
    }
    let total = ((img.height() - n + 1) * (img.width() - n + 1)) as u64;
    Ok(PatchCounts { counts, total })
}

/// `p̂ = (1/N_im) Σ_i n(i)/N_i` together with the pooled counts.
#[derive(Debug, Clone)]
pub struct EmpiricalDistribution {
    pub probs: Distribution,
    pub pooled: Vec<u64>,
    pub images: usize,
}

pub fn aggregate(list: &[PatchCounts]) -> Result<EmpiricalDistribution, ImageError> {
    let first = list.first().ok_or(ImageError::EmptyList)?;
    let k = first.counts.len();
    let mut avg = vec![0.0; k];
    let mut pooled = vec![0u64; k];
    for pc in list {
        if pc.counts.len() != k {
            return Err(ImageError::InconsistentK {
                expected: k,
                got: pc.counts.len(),
            });
        }
        let n = pc.total as f64;
        for (i, &c) in pc.counts.iter().enumerate() {
            avg[i] += c as f64 / n;
            pooled[i] += c;
        }
    }
    let m = list.len() as f64;
    avg.iter_mut().for_each(|v| *v /= m);
    Ok(EmpiricalDistribution {
        probs: Distribution::from_weights(&avg).expect("average of frequency vectors"),
        pooled,
        images: list.len(),
    })
}
