//! 8-bit grayscale raster.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ImageError {
    #[error("image dimensions must be positive, got {width}x{height}")]
    ZeroDimension { width: usize, height: usize },
    #[error("expected {expected} pixels for the declared dimensions, got {actual}")]
    PixelCountMismatch { expected: usize, actual: usize },
    #[error("image dimensions {width}x{height} overflow the addressable pixel count")]
    TooLarge { width: usize, height: usize },
    #[error("block at ({x}, {y}) of size {w}x{h} does not fit in a {width}x{height} image")]
    BlockOutOfBounds {
        x: usize,
        y: usize,
        w: usize,
        h: usize,
        width: usize,
        height: usize,
    },
}

/// A `width` x `height` grid of gray levels stored row-major.
///
/// Construction validates the shape, so every `GrayImage` in circulation has
/// positive dimensions and exactly `width * height` pixels. Pixel values are
/// `u8`, which pins them to `[0, 255]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

pub(crate) fn checked_area(width: usize, height: usize) -> Result<usize, ImageError> {
    if width == 0 || height == 0 {
        return Err(ImageError::ZeroDimension { width, height });
    }
    width
        .checked_mul(height)
        .ok_or(ImageError::TooLarge { width, height })
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, ImageError> {
        let expected = checked_area(width, height)?;
        if pixels.len() != expected {
            return Err(ImageError::PixelCountMismatch {
                expected,
                actual: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Builds an image by evaluating `f(x, y)` for every pixel in row-major order.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> u8,
    ) -> Result<Self, ImageError> {
        let area = checked_area(width, height)?;
        let mut pixels = Vec::with_capacity(area);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self, ImageError> {
        let area = checked_area(width, height)?;
        Ok(Self {
            width,
            height,
            pixels: vec![value; area],
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    /// Pixel at column `x`, row `y`.
    ///
    /// Panics if the coordinate is outside the image.
    pub fn get(&self, x: usize, y: usize) -> u8 {
        assert!(
            x < self.width && y < self.height,
            "pixel ({x}, {y}) out of bounds"
        );
        self.pixels[y * self.width + x]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u8]> {
        self.pixels.chunks_exact(self.width)
    }

    pub fn max_pixel(&self) -> u8 {
        self.pixels.iter().copied().max().unwrap_or(0)
    }

    /// Copies out the `w` x `h` sub-grid whose top-left corner is at (`x`, `y`).
    pub fn extract_block(
        &self,
        x: usize,
        y: usize,
        w: usize,
        h: usize,
    ) -> Result<GrayImage, ImageError> {
        let oob = || ImageError::BlockOutOfBounds {
            x,
            y,
            w,
            h,
            width: self.width,
            height: self.height,
        };
        let fits = |offset: usize, len: usize, limit: usize| {
            offset.checked_add(len).is_some_and(|end| end <= limit)
        };
        if !fits(x, w, self.width) || !fits(y, h, self.height) {
            return Err(oob());
        }
        let area = checked_area(w, h)?;
        let mut pixels = Vec::with_capacity(area);
        for row in self.rows().skip(y).take(h) {
            pixels.extend_from_slice(&row[x..x + w]);
        }
        Ok(GrayImage {
            width: w,
            height: h,
            pixels,
        })
    }

    pub(crate) fn with_pixels(&self, pixels: Vec<u8>) -> GrayImage {
        debug_assert_eq!(pixels.len(), self.pixels.len());
        GrayImage {
            width: self.width,
            height: self.height,
            pixels,
        }
    }
}
