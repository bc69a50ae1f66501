//! `RMIK1` key files.
//!
//! ```text
//! RMIK1
//! <width> <height>
//! seed | explicit
//! <seed>                       (seed mode)
//! <row 0 entries> ... <row h-1> (explicit mode, space separated)
//! ```
//!
//! Lines end in LF. CRLF input is accepted.

use std::fmt::Write as _;

use thiserror::Error;

use crate::rmi::{generate_key, key_from_matrix, Provenance, RmiKey};

pub const MAGIC: &str = "RMIK1";

/// Upper bound on `width * height` accepted from a key file.
pub const MAX_KEY_ENTRIES: usize = 1 << 28;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KeyFileError {
    #[error("key file is not valid UTF-8 text")]
    NotText,
    #[error("bad magic: expected {MAGIC}")]
    BadMagic,
    #[error("malformed dimensions line: {0:?}")]
    MalformedDimensions(String),
    #[error("unknown key mode {0:?}")]
    UnknownMode(String),
    #[error("malformed seed: {0:?}")]
    MalformedSeed(String),
    #[error("malformed entry {token:?} on row {row}")]
    MalformedEntry { row: usize, token: String },
    #[error("entry {value} on row {row} is outside [0, 10]")]
    EntryOutOfRange { row: usize, value: i64 },
    #[error("wrong entry count: {0}")]
    WrongEntryCount(String),
    #[error("unexpected content after the key body")]
    TrailingData,
}

pub fn serialize_key(key: &RmiKey) -> String {
    let mut out = format!("{MAGIC}\n{} {}\n", key.width(), key.height());
    match key.provenance() {
        Provenance::Seeded(seed) => {
            let _ = writeln!(out, "seed\n{seed}");
        }
        Provenance::Explicit => {
            out.push_str("explicit\n");
            for row in key.rows() {
                let line: Vec<String> = row.iter().map(u8::to_string).collect();
                out.push_str(&line.join(" "));
                out.push('\n');
            }
        }
    }
    out
}

fn is_decimal(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}

fn parse_dimension(s: &str, line: &str) -> Result<usize, KeyFileError> {
    let bad = || KeyFileError::MalformedDimensions(line.to_owned());
    if !is_decimal(s) {
        return Err(bad());
    }
    match s.parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(bad()),
    }
}

pub fn parse_key(bytes: &[u8]) -> Result<RmiKey, KeyFileError> {
    let text = std::str::from_utf8(bytes).map_err(|_| KeyFileError::NotText)?;
    let text = text.replace("\r\n", "\n");
    let body = text.strip_suffix('\n').unwrap_or(&text);
    let mut lines = body.split('\n');

    if lines.next() != Some(MAGIC) {
        return Err(KeyFileError::BadMagic);
    }

    let dims = lines
        .next()
        .ok_or_else(|| KeyFileError::MalformedDimensions(String::new()))?;
    let (width, height) = match dims.split(' ').collect::<Vec<_>>()[..] {
        [w, h] => (parse_dimension(w, dims)?, parse_dimension(h, dims)?),
        _ => return Err(KeyFileError::MalformedDimensions(dims.to_owned())),
    };
    if width
        .checked_mul(height)
        .is_none_or(|n| n > MAX_KEY_ENTRIES)
    {
        return Err(KeyFileError::MalformedDimensions(dims.to_owned()));
    }

    let bad_dims = |_| KeyFileError::MalformedDimensions(dims.to_owned());
    let key = match lines.next() {
        Some("seed") => {
            let line = lines.next().unwrap_or("");
            if !is_decimal(line) {
                return Err(KeyFileError::MalformedSeed(line.to_owned()));
            }
            let seed = line
                .parse::<u64>()
                .map_err(|_| KeyFileError::MalformedSeed(line.to_owned()))?;
            generate_key(width, height, seed).map_err(bad_dims)?
        }
        Some("explicit") => {
            let mut entries = Vec::with_capacity(width * height);
            for row in 0..height {
                let line = lines.next().ok_or_else(|| {
                    KeyFileError::WrongEntryCount(format!("expected {height} rows, found {row}"))
                })?;
                let tokens: Vec<&str> = line.split(' ').collect();
                if tokens.len() != width {
                    return Err(KeyFileError::WrongEntryCount(format!(
                        "row {row} has {} entries, expected {width}",
                        tokens.len()
                    )));
                }
                for token in tokens {
                    let digits = token.strip_prefix('-').unwrap_or(token);
                    let value = if is_decimal(digits) {
                        token.parse::<i64>().ok()
                    } else {
                        None
                    };
                    let value = value.ok_or_else(|| KeyFileError::MalformedEntry {
                        row,
                        token: token.to_owned(),
                    })?;
                    if !(0..=10).contains(&value) {
                        return Err(KeyFileError::EntryOutOfRange { row, value });
                    }
                    entries.push(value);
                }
            }
            key_from_matrix(&entries, width, height).map_err(bad_dims)?
        }
        Some(mode) => return Err(KeyFileError::UnknownMode(mode.to_owned())),
        None => return Err(KeyFileError::UnknownMode(String::new())),
    };

    match lines.next() {
        None => Ok(key),
        Some(_) if key.provenance() == Provenance::Explicit => Err(KeyFileError::WrongEntryCount(
            format!("more than {height} rows"),
        )),
        Some(_) => Err(KeyFileError::TrailingData),
    }
}
