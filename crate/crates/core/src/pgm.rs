//! Portable GrayMap reading and writing.
//!
//! Only `maxval = 255` is accepted, in both the binary (`P5`) and plain
//! (`P2`) flavours. Header tokens may be separated by any whitespace and
//! `#` comments running to the end of the line. Parsing is strict: the
//! payload must hold exactly `width * height` samples.

use std::fmt::Write as _;

use thiserror::Error;

use crate::image::{checked_area, GrayImage};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgmVariant {
    /// `P5`, one raw byte per pixel.
    Binary,
    /// `P2`, decimal samples as text.
    Ascii,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PgmError {
    #[error("malformed PGM header: {0}")]
    MalformedHeader(String),
    #[error("truncated PGM payload: expected {expected} pixels, found {found}")]
    TruncatedPayload { expected: usize, found: usize },
    #[error("PGM pixel value {value} at index {index} exceeds maxval 255")]
    ValueOutOfRange { index: usize, value: u64 },
    #[error("invalid PGM pixel token {token:?} at index {index}")]
    InvalidPixelToken { index: usize, token: String },
    #[error("PGM payload has data after the last of {expected} pixels")]
    TrailingData { expected: usize },
}

fn is_pnm_space(b: u8) -> bool {
    matches!(b, b' ' | b'\t' | b'\n' | b'\r' | 0x0b | 0x0c)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    /// Skips whitespace and comments. Returns whether anything was skipped.
    fn skip_separators(&mut self) -> bool {
        let start = self.pos;
        while let Some(&b) = self.bytes.get(self.pos) {
            if is_pnm_space(b) {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
        self.pos > start
    }

    fn header_number(&mut self, what: &str) -> Result<usize, PgmError> {
        if !self.skip_separators() {
            return Err(PgmError::MalformedHeader(format!(
                "missing separator before {what}"
            )));
        }
        let start = self.pos;
        while self
            .bytes
            .get(self.pos)
            .is_some_and(|b| !is_pnm_space(*b) && *b != b'#')
        {
            self.pos += 1;
        }
        let token = &self.bytes[start..self.pos];
        if token.is_empty() {
            return Err(PgmError::MalformedHeader(format!("missing {what}")));
        }
        if !token.iter().all(u8::is_ascii_digit) {
            return Err(PgmError::MalformedHeader(format!(
                "{what} is not a decimal integer: {:?}",
                String::from_utf8_lossy(token)
            )));
        }
        std::str::from_utf8(token)
            .ok()
            .and_then(|s| s.parse::<usize>().ok())
            .ok_or_else(|| PgmError::MalformedHeader(format!("{what} is too large")))
    }
}

/// Parses a `P5` or `P2` graymap.
pub fn load_pgm(bytes: &[u8]) -> Result<GrayImage, PgmError> {
    let variant = match bytes.get(..2) {
        Some(b"P5") => PgmVariant::Binary,
        Some(b"P2") => PgmVariant::Ascii,
        _ => {
            return Err(PgmError::MalformedHeader(
                "magic number must be P5 or P2".into(),
            ))
        }
    };
    let mut cur = Cursor { bytes, pos: 2 };
    let width = cur.header_number("width")?;
    let height = cur.header_number("height")?;
    let maxval = cur.header_number("maxval")?;
    if width == 0 || height == 0 {
        return Err(PgmError::MalformedHeader(format!(
            "dimensions must be positive, got {width}x{height}"
        )));
    }
    if maxval != 255 {
        return Err(PgmError::MalformedHeader(format!(
            "maxval must be 255, got {maxval}"
        )));
    }
    let area = checked_area(width, height).map_err(|e| PgmError::MalformedHeader(e.to_string()))?;

    let pixels = match variant {
        PgmVariant::Binary => {
            // Exactly one whitespace byte separates maxval from the raster.
            match bytes.get(cur.pos) {
                Some(&b) if is_pnm_space(b) => cur.pos += 1,
                _ => {
                    return Err(PgmError::MalformedHeader(
                        "missing whitespace after maxval".into(),
                    ))
                }
            }
            let payload = &bytes[cur.pos..];
            if payload.len() < area {
                return Err(PgmError::TruncatedPayload {
                    expected: area,
                    found: payload.len(),
                });
            }
            if payload.len() > area {
                return Err(PgmError::TrailingData { expected: area });
            }
            payload.to_vec()
        }
        PgmVariant::Ascii => parse_plain_raster(&bytes[cur.pos..], area)?,
    };
    Ok(GrayImage::new(width, height, pixels).expect("shape validated above"))
}

fn parse_plain_raster(raster: &[u8], area: usize) -> Result<Vec<u8>, PgmError> {
    let mut pixels = Vec::with_capacity(area.min(raster.len() / 2 + 1));
    for (index, token) in raster
        .split(|b| is_pnm_space(*b))
        .filter(|t| !t.is_empty())
        .enumerate()
    {
        if index >= area {
            return Err(PgmError::TrailingData { expected: area });
        }
        let invalid = || PgmError::InvalidPixelToken {
            index,
            token: String::from_utf8_lossy(token).into_owned(),
        };
        if !token.iter().all(u8::is_ascii_digit) {
            return Err(invalid());
        }
        let value = std::str::from_utf8(token)
            .ok()
            .and_then(|s| s.parse::<u64>().ok())
            .unwrap_or(u64::MAX);
        let value = u8::try_from(value).map_err(|_| PgmError::ValueOutOfRange { index, value })?;
        pixels.push(value);
    }
    if pixels.len() < area {
        return Err(PgmError::TruncatedPayload {
            expected: area,
            found: pixels.len(),
        });
    }
    Ok(pixels)
}

/// Samples per line in plain output; keeps lines under 70 characters.
const PLAIN_SAMPLES_PER_LINE: usize = 16;

pub fn save_pgm(image: &GrayImage, variant: PgmVariant) -> Vec<u8> {
    let (width, height) = image.dimensions();
    match variant {
        PgmVariant::Binary => {
            let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
            out.extend_from_slice(image.pixels());
            out
        }
        PgmVariant::Ascii => {
            let mut out = format!("P2\n{width} {height}\n255\n");
            for row in image.rows() {
                for line in row.chunks(PLAIN_SAMPLES_PER_LINE) {
                    for (i, p) in line.iter().enumerate() {
                        if i > 0 {
                            out.push(' ');
                        }
                        let _ = write!(out, "{p}");
                    }
                    out.push('\n');
                }
            }
            out.into_bytes()
        }
    }
}
