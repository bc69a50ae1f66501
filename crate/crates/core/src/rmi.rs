//! Random matrix keys.
//!
//! A key is a grid of integers in `[0, 10]` with the same shape as the image
//! it marks. Seeded keys are expanded from a SplitMix64 stream, one draw per
//! entry in row-major order, each draw reduced modulo 11.

use thiserror::Error;

use crate::image::checked_area;

/// Largest value a key entry may take.
pub const MAX_ENTRY: u8 = 10;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 generator state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrngState(pub u64);

impl PrngState {
    pub fn new(seed: u64) -> Self {
        PrngState(seed)
    }

    /// Advances the state in place and returns the next output.
    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let (value, next) = prng_next(*self);
        *self = next;
        value
    }
}

impl Iterator for PrngState {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        Some(self.next_u64())
    }
}

/// One SplitMix64 step: returns the output and the advanced state.
#[inline]
pub fn prng_next(state: PrngState) -> (u64, PrngState) {
    let next = state.0.wrapping_add(GOLDEN_GAMMA);
    let mut z = next;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    (z ^ (z >> 31), PrngState(next))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    Seeded(u64),
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KeyError {
    #[error("key dimensions must be positive, got {width}x{height}")]
    ZeroDimension { width: usize, height: usize },
    #[error("key dimensions {width}x{height} are too large")]
    TooLarge { width: usize, height: usize },
    #[error("key has {actual} entries but {width}x{height} needs {expected}")]
    LengthMismatch {
        width: usize,
        height: usize,
        expected: usize,
        actual: usize,
    },
    #[error("key entry {value} at index {index} is outside [0, 10]")]
    ValueOutOfRange { index: usize, value: i64 },
}

/// The secret watermark matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RmiKey {
    width: usize,
    height: usize,
    entries: Vec<u8>,
    provenance: Provenance,
}

fn key_area(width: usize, height: usize) -> Result<usize, KeyError> {
    if width == 0 || height == 0 {
        return Err(KeyError::ZeroDimension { width, height });
    }
    checked_area(width, height).map_err(|_| KeyError::TooLarge { width, height })
}

/// Expands `seed` into a `width` x `height` key.
pub fn generate_key(width: usize, height: usize, seed: u64) -> Result<RmiKey, KeyError> {
    let area = key_area(width, height)?;
    let entries = PrngState::new(seed)
        .take(area)
        .map(|v| (v % (MAX_ENTRY as u64 + 1)) as u8)
        .collect();
    Ok(RmiKey {
        width,
        height,
        entries,
        provenance: Provenance::Seeded(seed),
    })
}

/// Wraps caller-supplied entries (row-major) as an explicit key.
pub fn key_from_matrix(entries: &[i64], width: usize, height: usize) -> Result<RmiKey, KeyError> {
    let expected = key_area(width, height)?;
    if entries.len() != expected {
        return Err(KeyError::LengthMismatch {
            width,
            height,
            expected,
            actual: entries.len(),
        });
    }
    let entries = entries
        .iter()
        .enumerate()
        .map(|(index, &value)| match u8::try_from(value) {
            Ok(v) if v <= MAX_ENTRY => Ok(v),
            _ => Err(KeyError::ValueOutOfRange { index, value }),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RmiKey {
        width,
        height,
        entries,
        provenance: Provenance::Explicit,
    })
}

impl RmiKey {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn entries(&self) -> &[u8] {
        &self.entries
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u8]> {
        self.entries.chunks_exact(self.width)
    }

    /// Same entries, re-labelled as an explicit key.
    pub fn into_explicit(self) -> RmiKey {
        RmiKey {
            provenance: Provenance::Explicit,
            ..self
        }
    }
}
