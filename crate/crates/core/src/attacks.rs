//! Deterministic image corruptions for robustness experiments.
//!
//! Stochastic attacks draw from a SplitMix64 stream seeded by the attack's
//! seed, consuming draws pixel by pixel in row-major order, so results are
//! reproducible bit for bit.

use thiserror::Error;

use crate::image::GrayImage;
use crate::rmi::PrngState;

/// Axis-aligned pixel rectangle, top-left corner at (`x`, `y`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl Rect {
    fn fits(&self, width: usize, height: usize) -> bool {
        let end = |o: usize, l: usize| o.checked_add(l);
        end(self.x, self.w).is_some_and(|e| e <= width)
            && end(self.y, self.h).is_some_and(|e| e <= height)
    }

    fn contains(&self, x: usize, y: usize) -> bool {
        (self.x..self.x + self.w).contains(&x) && (self.y..self.y + self.h).contains(&y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AttackSpec {
    Identity,
    /// Adds a uniform integer offset in `[-amplitude, amplitude]` to each
    /// pixel, clamped to `[0, 255]`.
    UniformNoise {
        amplitude: u32,
        seed: u64,
    },
    /// Replaces each pixel with 0 or 255 with probability `density`.
    SaltPepper {
        density: f64,
        seed: u64,
    },
    /// Overwrites a rectangle with a constant.
    CropFill {
        rect: Rect,
        fill: u8,
    },
    /// Requantizes to `levels` gray levels with step `256 / levels`.
    Quantize {
        levels: u16,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AttackError {
    #[error("invalid attack parameters: {0}")]
    InvalidSpec(String),
    #[error("rectangle {rect:?} does not fit in a {width}x{height} image")]
    RectOutOfBounds {
        rect: Rect,
        width: usize,
        height: usize,
    },
}

impl AttackSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            AttackSpec::Identity => "identity",
            AttackSpec::UniformNoise { .. } => "uniform_noise",
            AttackSpec::SaltPepper { .. } => "salt_pepper",
            AttackSpec::CropFill { .. } => "crop_fill",
            AttackSpec::Quantize { .. } => "quantize",
        }
    }

    /// Checks the parameters independently of any image.
    pub fn validate(&self) -> Result<(), AttackError> {
        match *self {
            AttackSpec::SaltPepper { density, .. } if !(0.0..=1.0).contains(&density) => Err(
                AttackError::InvalidSpec(format!("density {density} is not in [0, 1]")),
            ),
            AttackSpec::Quantize { levels } if !(2..=256).contains(&levels) => Err(
                AttackError::InvalidSpec(format!("levels {levels} is not in [2, 256]")),
            ),
            _ => Ok(()),
        }
    }
}

pub fn apply_attack(image: &GrayImage, spec: &AttackSpec) -> Result<GrayImage, AttackError> {
    spec.validate()?;
    let pixels = image.pixels();
    let out: Vec<u8> = match *spec {
        AttackSpec::Identity => pixels.to_vec(),
        AttackSpec::UniformNoise { amplitude, seed } => {
            let span = 2 * u64::from(amplitude) + 1;
            let amplitude = i64::from(amplitude);
            let mut rng = PrngState::new(seed);
            pixels
                .iter()
                .map(|&p| {
                    let delta = (rng.next_u64() % span) as i64 - amplitude;
                    (i64::from(p) + delta).clamp(0, 255) as u8
                })
                .collect()
        }
        AttackSpec::SaltPepper { density, seed } => {
            let mut rng = PrngState::new(seed);
            pixels
                .iter()
                .map(|&p| {
                    let u = (rng.next_u64() & 0xFFFF_FFFF) as f64 / 4_294_967_296.0;
                    if u < density {
                        if rng.next_u64().is_multiple_of(2) {
                            0
                        } else {
                            255
                        }
                    } else {
                        p
                    }
                })
                .collect()
        }
        AttackSpec::CropFill { rect, fill } => {
            let (width, height) = image.dimensions();
            if !rect.fits(width, height) {
                return Err(AttackError::RectOutOfBounds {
                    rect,
                    width,
                    height,
                });
            }
            pixels
                .iter()
                .enumerate()
                .map(|(i, &p)| {
                    if rect.contains(i % width, i / width) {
                        fill
                    } else {
                        p
                    }
                })
                .collect()
        }
        AttackSpec::Quantize { levels } => {
            let step = (256 / levels) as u8;
            pixels.iter().map(|&p| p / step * step).collect()
        }
    };
    Ok(image.with_pixels(out))
}
