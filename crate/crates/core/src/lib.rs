//! Random-matrix additive watermarking for 8-bit grayscale images.
//!
//! A secret key matrix with entries in `[0, 10]` is added pixel-wise to a
//! host image. Holding the key recovers the host exactly; holding the host
//! exposes the key. The crate also provides PGM I/O, a key file format,
//! seeded attack operators and quality metrics for measuring the scheme.

pub mod attacks;
pub mod golden;
pub mod image;
pub mod keyfile;
pub mod metrics;
pub mod pgm;
pub mod rmi;
pub mod watermark;

pub use attacks::{apply_attack, AttackError, AttackSpec, Rect};
pub use image::{GrayImage, ImageError};
pub use keyfile::{parse_key, serialize_key, KeyFileError};
pub use metrics::{mse, ncc, psnr, MetricsError, MetricsReport};
pub use pgm::{load_pgm, save_pgm, PgmError, PgmVariant};
pub use rmi::{generate_key, key_from_matrix, prng_next, KeyError, PrngState, Provenance, RmiKey};
pub use watermark::{
    embed, extract_watermark, recover_original, verify, Decision, DiffMatrix, VerificationReport,
    WatermarkError,
};
