//! Image-quality and similarity measures: MSE, PSNR (peak 255) and
//! uncentered normalized cross-correlation.

use std::fmt;

use thiserror::Error;

use crate::image::GrayImage;

const PEAK: f64 = 255.0;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("cannot correlate empty sequences")]
    Empty,
}

fn same_shape(a: &GrayImage, b: &GrayImage) -> Result<(), MetricsError> {
    if a.dimensions() != b.dimensions() {
        return Err(MetricsError::DimensionMismatch {
            left: a.dimensions(),
            right: b.dimensions(),
        });
    }
    Ok(())
}

/// Sum of squared pixel differences, exact.
pub fn squared_error_sum(a: &GrayImage, b: &GrayImage) -> Result<u64, MetricsError> {
    same_shape(a, b)?;
    Ok(a.pixels()
        .iter()
        .zip(b.pixels())
        .map(|(&x, &y)| {
            let d = u64::from(x.abs_diff(y));
            d * d
        })
        .sum())
}

pub fn mse(a: &GrayImage, b: &GrayImage) -> Result<f64, MetricsError> {
    let sum = squared_error_sum(a, b)?;
    Ok(sum as f64 / a.pixels().len() as f64)
}

/// PSNR from an MSE value. Identical images yield `f64::INFINITY`.
pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (PEAK * PEAK / mse).log10()
    }
}

pub fn psnr(a: &GrayImage, b: &GrayImage) -> Result<f64, MetricsError> {
    mse(a, b).map(psnr_from_mse)
}

/// Uncentered normalized cross-correlation, `Σab / √(Σa²·Σb²)`.
///
/// Two all-zero inputs correlate perfectly (1); if only one side is all
/// zero the result is 0.
pub fn ncc<A, B>(a: &[A], b: &[B]) -> Result<f64, MetricsError>
where
    A: Copy + Into<f64>,
    B: Copy + Into<f64>,
{
    if a.len() != b.len() {
        return Err(MetricsError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(MetricsError::Empty);
    }
    let (mut ab, mut aa, mut bb) = (0.0f64, 0.0f64, 0.0f64);
    for (&x, &y) in a.iter().zip(b) {
        let (x, y): (f64, f64) = (x.into(), y.into());
        ab += x * y;
        aa += x * x;
        bb += y * y;
    }
    Ok(match (aa == 0.0, bb == 0.0) {
        (true, true) => 1.0,
        (true, false) | (false, true) => 0.0,
        _ => (ab / (aa * bb).sqrt()).clamp(-1.0, 1.0),
    })
}

/// MSE, PSNR and pixel NCC between two images.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub mse: f64,
    /// `f64::INFINITY` exactly when `mse == 0`.
    pub psnr_db: f64,
    pub ncc: f64,
}

impl MetricsReport {
    pub fn compare(a: &GrayImage, b: &GrayImage) -> Result<Self, MetricsError> {
        let mse = mse(a, b)?;
        Ok(Self {
            mse,
            psnr_db: psnr_from_mse(mse),
            ncc: ncc(a.pixels(), b.pixels())?,
        })
    }
}

/// Renders `mse=..`, `psnr_db=..`, `ncc=..` lines.
impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "mse={}", format_real(self.mse))?;
        writeln!(f, "psnr_db={}", format_real(self.psnr_db))?;
        writeln!(f, "ncc={}", format_real(self.ncc))
    }
}

/// Fixed-point rendering with at least six significant digits and at least
/// six decimals. Infinity prints as `inf`.
pub fn format_real(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let decimals = if v == 0.0 || v.abs() >= 1.0 {
        6
    } else {
        let magnitude = v.abs().log10().floor() as i32;
        (5 - magnitude).clamp(6, 330) as usize
    };
    format!("{v:.decimals$}")
}
