//! `rmi` command-line front end.
//!
//! Machine-readable results go to stdout, diagnostics to stderr. Every
//! failure maps onto one [`ExitStatus`].

use std::fmt;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rmi_core::attacks::{apply_attack, AttackError, AttackSpec, Rect};
use rmi_core::golden;
use rmi_core::image::GrayImage;
use rmi_core::keyfile::{parse_key, serialize_key};
use rmi_core::metrics::{format_real, MetricsError, MetricsReport};
use rmi_core::pgm::{load_pgm, save_pgm, PgmVariant};
use rmi_core::rmi::{generate_key, RmiKey};
use rmi_core::watermark::{
    embed, extract_watermark, recover_original, verify, Decision, WatermarkError, DEFAULT_THRESHOLD,
};

/// Process exit codes. The numeric values are part of the interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    /// Verification ran and decided the watermark is absent, or the demo failed.
    Absent = 1,
    Usage = 2,
    Precondition = 3,
    Io = 4,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug)]
pub struct CliError {
    pub status: ExitStatus,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            status: ExitStatus::Usage,
            message: message.into(),
        }
    }

    fn precondition(message: impl fmt::Display) -> Self {
        Self {
            status: ExitStatus::Precondition,
            message: message.to_string(),
        }
    }

    fn io(path: &Path, err: io::Error) -> Self {
        Self {
            status: ExitStatus::Io,
            message: format!("{}: {err}", path.display()),
        }
    }
}

impl From<WatermarkError> for CliError {
    fn from(e: WatermarkError) -> Self {
        match e {
            WatermarkError::InvalidThreshold(_) => CliError::usage(e.to_string()),
            _ => CliError::precondition(e),
        }
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        CliError::precondition(e)
    }
}

impl From<AttackError> for CliError {
    fn from(e: AttackError) -> Self {
        match e {
            AttackError::InvalidSpec(_) => CliError::usage(e.to_string()),
            AttackError::RectOutOfBounds { .. } => CliError::precondition(e),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "rmi",
    version,
    about = "Random matrix image watermarking for grayscale PGM files"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a key from a seed and write it as an RMIK1 file.
    GenKey {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        width: u64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        height: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Store every entry instead of just the seed.
        #[arg(long)]
        explicit: bool,
    },
    /// Add a key to a host image.
    Embed {
        #[arg(long)]
        host: PathBuf,
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Subtract a key from a watermarked image to recover the host.
    Recover {
        #[arg(long)]
        watermarked: PathBuf,
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare the watermark extracted against an original with a key.
    Verify {
        #[arg(long)]
        watermarked: PathBuf,
        #[arg(long)]
        original: PathBuf,
        #[arg(long)]
        key: PathBuf,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD, value_parser = parse_threshold)]
        threshold: f64,
    },
    /// Apply a deterministic corruption to an image.
    Attack {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        kind: AttackKind,
        #[arg(long)]
        amplitude: Option<u32>,
        #[arg(long)]
        density: Option<f64>,
        /// Rectangle as `x,y,w,h`.
        #[arg(long, value_parser = parse_rect)]
        rect: Option<Rect>,
        #[arg(long)]
        fill: Option<u8>,
        #[arg(long)]
        levels: Option<u16>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print MSE, PSNR and NCC between two images.
    Metrics {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// Re-run the 8x8 worked example and check it.
    DemoPaper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
enum AttackKind {
    Identity,
    UniformNoise,
    SaltPepper,
    CropFill,
    Quantize,
}

fn parse_threshold(s: &str) -> Result<f64, String> {
    let t: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&t) {
        Ok(t)
    } else {
        Err(format!("threshold {t} is not in [0, 1]"))
    }
}

fn parse_rect(s: &str) -> Result<Rect, String> {
    let parts = s
        .split(',')
        .map(|p| p.trim().parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| format!("{e}"))?;
    match parts[..] {
        [x, y, w, h] => Ok(Rect { x, y, w, h }),
        _ => Err(format!("expected x,y,w,h, got {s:?}")),
    }
}

struct AttackFlags {
    amplitude: Option<u32>,
    density: Option<f64>,
    rect: Option<Rect>,
    fill: Option<u8>,
    levels: Option<u16>,
    seed: Option<u64>,
}

impl AttackFlags {
    /// Builds the spec for `kind`, rejecting missing or unrelated flags.
    fn into_spec(self, kind: AttackKind) -> Result<AttackSpec, CliError> {
        let given = [
            ("--amplitude", self.amplitude.is_some()),
            ("--density", self.density.is_some()),
            ("--rect", self.rect.is_some()),
            ("--fill", self.fill.is_some()),
            ("--levels", self.levels.is_some()),
            ("--seed", self.seed.is_some()),
        ];
        let allowed: &[&str] = match kind {
            AttackKind::Identity => &[],
            AttackKind::UniformNoise => &["--amplitude", "--seed"],
            AttackKind::SaltPepper => &["--density", "--seed"],
            AttackKind::CropFill => &["--rect", "--fill"],
            AttackKind::Quantize => &["--levels"],
        };
        if let Some((flag, _)) = given
            .iter()
            .find(|(flag, present)| *present && !allowed.contains(flag))
        {
            return Err(CliError::usage(format!(
                "{flag} does not apply to --kind {}",
                kind.to_possible_value().unwrap().get_name()
            )));
        }
        let need = |flag: &str| CliError::usage(format!("{flag} is required for this --kind"));
        let seed = self.seed.unwrap_or(0);
        let spec = match kind {
            AttackKind::Identity => AttackSpec::Identity,
            AttackKind::UniformNoise => AttackSpec::UniformNoise {
                amplitude: self.amplitude.ok_or_else(|| need("--amplitude"))?,
                seed,
            },
            AttackKind::SaltPepper => AttackSpec::SaltPepper {
                density: self.density.ok_or_else(|| need("--density"))?,
                seed,
            },
            AttackKind::CropFill => AttackSpec::CropFill {
                rect: self.rect.ok_or_else(|| need("--rect"))?,
                fill: self.fill.ok_or_else(|| need("--fill"))?,
            },
            AttackKind::Quantize => AttackSpec::Quantize {
                levels: self.levels.ok_or_else(|| need("--levels"))?,
            },
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::io(path, e))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn read_image(path: &Path) -> Result<GrayImage, CliError> {
    load_pgm(&read(path)?).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn read_key(path: &Path) -> Result<RmiKey, CliError> {
    parse_key(&read(path)?).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn write_image(path: &Path, image: &GrayImage) -> Result<(), CliError> {
    write(path, &save_pgm(image, PgmVariant::Binary))
}

fn stdout_err(e: io::Error) -> CliError {
    CliError {
        status: ExitStatus::Io,
        message: format!("stdout: {e}"),
    }
}

fn print_matrix<T: fmt::Display>(
    out: &mut dyn Write,
    title: &str,
    width: usize,
    values: &[T],
) -> io::Result<()> {
    writeln!(out, "{title}:")?;
    for row in values.chunks(width) {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:>3}")).collect();
        writeln!(out, "{}", cells.join(" "))?;
    }
    Ok(())
}

/// Embeds `key` into `host`, compares the result with `expected`, checks
/// both inverse directions, and prints everything. Returns whether all
/// checks passed.
pub fn run_demo(
    host: &GrayImage,
    key: &RmiKey,
    expected: &GrayImage,
    out: &mut dyn Write,
) -> io::Result<bool> {
    let width = host.width();
    let total = host.pixels().len();
    print_matrix(out, "host", width, host.pixels())?;
    print_matrix(out, "key", width, key.entries())?;
    let watermarked = match embed(host, key) {
        Ok(w) => w,
        Err(e) => {
            writeln!(out, "embed failed: {e}")?;
            writeln!(out, "FAIL")?;
            return Ok(false);
        }
    };
    print_matrix(out, "watermarked", width, watermarked.pixels())?;

    let count = |a: &[u8], b: &[u8]| a.iter().zip(b).filter(|(x, y)| x == y).count();
    let embed_ok = watermarked.dimensions() == expected.dimensions()
        && count(watermarked.pixels(), expected.pixels()) == total;
    writeln!(
        out,
        "embed: {}/{total} entries match expected",
        if watermarked.dimensions() == expected.dimensions() {
            count(watermarked.pixels(), expected.pixels())
        } else {
            0
        }
    )?;

    let recovered = recover_original(&watermarked, key).ok();
    let recover_ok = recovered.as_ref() == Some(host);
    writeln!(
        out,
        "recover_original: {}",
        if recover_ok {
            "host restored"
        } else {
            "mismatch"
        }
    )?;

    let extract_ok = extract_watermark(&watermarked, host).is_ok_and(|d| {
        d.in_range()
            && d.values()
                .iter()
                .zip(key.entries())
                .all(|(&v, &k)| v == i16::from(k))
    });
    writeln!(
        out,
        "extract_watermark: {}",
        if extract_ok {
            "key recovered"
        } else {
            "mismatch"
        }
    )?;

    let pass = embed_ok && recover_ok && extract_ok;
    writeln!(out, "{}", if pass { "PASS" } else { "FAIL" })?;
    Ok(pass)
}

fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<ExitStatus, CliError> {
    match cli.command {
        Command::GenKey {
            width,
            height,
            seed,
            out,
            explicit,
        } => {
            let dim =
                |v: u64| usize::try_from(v).map_err(|_| CliError::usage("dimension too large"));
            let key = generate_key(dim(width)?, dim(height)?, seed)
                .map_err(|e| CliError::usage(e.to_string()))?;
            let key = if explicit { key.into_explicit() } else { key };
            write(&out, serialize_key(&key).as_bytes())?;
        }
        Command::Embed { host, key, out } => {
            let host = read_image(&host)?;
            let key = read_key(&key)?;
            write_image(&out, &embed(&host, &key)?)?;
        }
        Command::Recover {
            watermarked,
            key,
            out,
        } => {
            let watermarked = read_image(&watermarked)?;
            let key = read_key(&key)?;
            write_image(&out, &recover_original(&watermarked, &key)?)?;
        }
        Command::Verify {
            watermarked,
            original,
            key,
            threshold,
        } => {
            let watermarked = read_image(&watermarked)?;
            let original = read_image(&original)?;
            let key = read_key(&key)?;
            let report = verify(&watermarked, &original, &key, threshold)?;
            write!(
                stdout,
                "match_ratio={}\nncc={}\ndecision={}\n",
                format_real(report.match_ratio),
                format_real(report.ncc),
                report.decision.as_str()
            )
            .map_err(stdout_err)?;
            if report.decision == Decision::Absent {
                return Ok(ExitStatus::Absent);
            }
        }
        Command::Attack {
            input,
            out,
            kind,
            amplitude,
            density,
            rect,
            fill,
            levels,
            seed,
        } => {
            let spec = AttackFlags {
                amplitude,
                density,
                rect,
                fill,
                levels,
                seed,
            }
            .into_spec(kind)?;
            let image = read_image(&input)?;
            write_image(&out, &apply_attack(&image, &spec)?)?;
        }
        Command::Metrics { a, b } => {
            let a = read_image(&a)?;
            let b = read_image(&b)?;
            write!(stdout, "{}", MetricsReport::compare(&a, &b)?).map_err(stdout_err)?;
        }
        Command::DemoPaper => {
            let pass = run_demo(
                &golden::host_image(),
                &golden::key(),
                &golden::watermarked_image(),
                stdout,
            )
            .map_err(stdout_err)?;
            if !pass {
                return Ok(ExitStatus::Absent);
            }
        }
    }
    Ok(ExitStatus::Success)
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> ExitStatus
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{rendered}");
                return ExitStatus::Usage;
            }
            let _ = write!(stdout, "{rendered}");
            return ExitStatus::Success;
        }
    };
    match execute(cli, stdout) {
        Ok(status) => status,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message);
            e.status
        }
    }
}
