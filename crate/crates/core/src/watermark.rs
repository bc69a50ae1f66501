//! Additive embedding, subtractive recovery and extraction, and verification.
//!
//! Embedding adds each key entry to the host pixel at the same index. The
//! scheme is non-blind in both directions: the key recovers the host, and
//! the host exposes the key. No clamping happens anywhere, so every host
//! pixel must leave room for the largest key entry.

use thiserror::Error;

use crate::image::GrayImage;
use crate::metrics::ncc;
use crate::rmi::{RmiKey, MAX_ENTRY};

/// Brightest host pixel that can absorb any key entry without overflow.
pub const MAX_HOST_PIXEL: u8 = u8::MAX - MAX_ENTRY;

pub const DEFAULT_THRESHOLD: f64 = 0.8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WatermarkError {
    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("host pixel at ({x}, {y}) is {value}, above the embeddable maximum of 245")]
    HostPixelTooBright { x: usize, y: usize, value: u8 },
    #[error("subtracting key entry {key} from pixel {value} at ({x}, {y}) goes negative")]
    NegativePixel {
        x: usize,
        y: usize,
        value: u8,
        key: u8,
    },
    #[error("threshold {0} is not in [0, 1]")]
    InvalidThreshold(f64),
}

fn check_dims(left: (usize, usize), right: (usize, usize)) -> Result<(), WatermarkError> {
    if left != right {
        return Err(WatermarkError::DimensionMismatch { left, right });
    }
    Ok(())
}

/// Adds `key` to `host` element-wise.
pub fn embed(host: &GrayImage, key: &RmiKey) -> Result<GrayImage, WatermarkError> {
    check_dims(host.dimensions(), key.dimensions())?;
    if let Some(i) = host.pixels().iter().position(|&p| p > MAX_HOST_PIXEL) {
        return Err(WatermarkError::HostPixelTooBright {
            x: i % host.width(),
            y: i / host.width(),
            value: host.pixels()[i],
        });
    }
    let pixels = host
        .pixels()
        .iter()
        .zip(key.entries())
        .map(|(&p, &k)| p + k)
        .collect();
    Ok(host.with_pixels(pixels))
}

/// Subtracts `key` from a watermarked image to get the host back.
///
/// A negative result means the image was altered or the key is wrong.
pub fn recover_original(
    watermarked: &GrayImage,
    key: &RmiKey,
) -> Result<GrayImage, WatermarkError> {
    check_dims(watermarked.dimensions(), key.dimensions())?;
    let width = watermarked.width();
    let pixels = watermarked
        .pixels()
        .iter()
        .zip(key.entries())
        .enumerate()
        .map(|(i, (&p, &k))| {
            p.checked_sub(k).ok_or(WatermarkError::NegativePixel {
                x: i % width,
                y: i / width,
                value: p,
                key: k,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(watermarked.with_pixels(pixels))
}

/// Signed element-wise difference `watermarked - original`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffMatrix {
    width: usize,
    height: usize,
    values: Vec<i16>,
    in_range: bool,
}

impl DiffMatrix {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[i16] {
        &self.values
    }

    /// True iff every value lies in `[0, 10]`, i.e. could be a key entry.
    pub fn in_range(&self) -> bool {
        self.in_range
    }
}

/// Exposes the embedded key by subtracting the original from the
/// watermarked image. Out-of-range differences are reported, not rejected.
pub fn extract_watermark(
    watermarked: &GrayImage,
    original: &GrayImage,
) -> Result<DiffMatrix, WatermarkError> {
    check_dims(watermarked.dimensions(), original.dimensions())?;
    let values: Vec<i16> = watermarked
        .pixels()
        .iter()
        .zip(original.pixels())
        .map(|(&w, &o)| i16::from(w) - i16::from(o))
        .collect();
    let in_range = values
        .iter()
        .all(|v| (0..=i16::from(MAX_ENTRY)).contains(v));
    Ok(DiffMatrix {
        width: watermarked.width(),
        height: watermarked.height(),
        values,
        in_range,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Present,
    Absent,
}

impl Decision {
    pub fn as_str(self) -> &'static str {
        match self {
            Decision::Present => "present",
            Decision::Absent => "absent",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerificationReport {
    pub exact_match: bool,
    pub match_ratio: f64,
    pub ncc: f64,
    pub threshold: f64,
    pub decision: Decision,
}

/// Scores an extracted difference against the expected key.
pub fn score(
    diff: &DiffMatrix,
    key: &RmiKey,
    threshold: f64,
) -> Result<VerificationReport, WatermarkError> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(WatermarkError::InvalidThreshold(threshold));
    }
    check_dims((diff.width, diff.height), key.dimensions())?;
    let matches = diff
        .values
        .iter()
        .zip(key.entries())
        .filter(|(&d, &k)| d == i16::from(k))
        .count();
    let total = diff.values.len();
    let match_ratio = matches as f64 / total as f64;
    let ncc = ncc(&diff.values, key.entries()).expect("lengths checked, non-empty");
    Ok(VerificationReport {
        exact_match: matches == total,
        match_ratio,
        ncc,
        threshold,
        decision: if match_ratio >= threshold {
            Decision::Present
        } else {
            Decision::Absent
        },
    })
}

/// Checks whether `watermarked - original` reproduces `key`.
pub fn verify(
    watermarked: &GrayImage,
    original: &GrayImage,
    key: &RmiKey,
    threshold: f64,
) -> Result<VerificationReport, WatermarkError> {
    let diff = extract_watermark(watermarked, original)?;
    score(&diff, key, threshold)
}
