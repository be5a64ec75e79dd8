//! Command-line front end.
//!
//! Exit codes: 0 success, 2 usage error, 3 I/O or format error, 4 bound
//! violation (`verify`).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use nlc_core::quantizer::MAX_TAU;
use nlc_core::sdnet::Sdnet;
use nlc_core::{decode_image, encode_image, linf_error, psnr, Bitstream, CodecConfig, DecodeError, Image, Psnr};
use rayon::prelude::*;
use thiserror::Error;

use crate::lsdw::{load_weights, LsdwError};
use crate::pgm::{read_pgm, write_pgm, PgmError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_VIOLATION: i32 = 4;

pub const SWEEP_HEADER: &str = "tau,bpp,psnr,linf";

#[derive(Debug, Parser)]
#[command(name = "nlc", version, about = "Near-lossless image codec with bounded soft decoding")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn tau_arg(s: &str) -> Result<u8, String> {
    match s.parse::<u8>() {
        Ok(t) if t <= MAX_TAU => Ok(t),
        _ => Err(format!("tau must be an integer in 0..={MAX_TAU}")),
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compress a PGM image with per-pixel error bound tau
    Encode {
        #[arg(long, value_parser = tau_arg)]
        tau: u8,
        input: PathBuf,
        output: PathBuf,
    },
    /// Hard-decode a stream to PGM
    Decode { input: PathBuf, output: PathBuf },
    /// Decode and restore with a soft-decoding network
    SoftDecode {
        input: PathBuf,
        #[arg(long)]
        weights: PathBuf,
        output: PathBuf,
    },
    /// Print PSNR and maximum absolute error between two PGM images
    Metrics { reference: PathBuf, test: PathBuf },
    /// Check that a stream decodes within tau (2 tau with --soft) of a reference
    Verify {
        input: PathBuf,
        reference: PathBuf,
        #[arg(long, value_name = "WEIGHTS")]
        soft: Option<PathBuf>,
    },
    /// Rate-distortion sweep over a range of tau, as CSV
    Sweep {
        #[arg(long, value_parser = tau_arg)]
        tau_min: u8,
        #[arg(long, value_parser = tau_arg)]
        tau_max: u8,
        reference: PathBuf,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Pgm { path: PathBuf, source: PgmError },
    #[error("{path}: {source}")]
    Stream { path: PathBuf, source: DecodeError },
    #[error("{path}: {source}")]
    Weights { path: PathBuf, source: LsdwError },
    #[error("{0}")]
    Invalid(String),
    #[error("bound violated")]
    Violation,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Violation => EXIT_VIOLATION,
            _ => EXIT_IO,
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|source| CliError::Io { path: path.to_owned(), source })
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|source| CliError::Io { path: path.to_owned(), source })
}

fn load_image(path: &Path) -> Result<Image, CliError> {
    read_pgm(&read(path)?).map_err(|source| CliError::Pgm { path: path.to_owned(), source })
}

fn load_stream(path: &Path) -> Result<Bitstream, CliError> {
    Bitstream::from_bytes(&read(path)?).map_err(|source| CliError::Stream { path: path.to_owned(), source })
}

fn hard_decode(path: &Path) -> Result<(Bitstream, Image), CliError> {
    let stream = load_stream(path)?;
    let img = decode_image(&stream).map_err(|source| CliError::Stream { path: path.to_owned(), source })?;
    Ok((stream, img))
}

fn load_network(path: &Path) -> Result<Sdnet, CliError> {
    let m = load_weights(&read(path)?).map_err(|source| CliError::Weights { path: path.to_owned(), source })?;
    Ok(Sdnet::new(&m))
}

fn soft(net: &Sdnet, y: &Image, tau: u8) -> Result<Image, CliError> {
    net.soft_decode(y, tau).map_err(|e| CliError::Invalid(e.to_string()))
}

fn dims_match(a: &Image, b: &Image) -> Result<(), CliError> {
    if (a.width(), a.height()) != (b.width(), b.height()) {
        return Err(CliError::Invalid(format!(
            "dimension mismatch: {}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    Ok(())
}

/// One row of a rate-distortion sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub tau: u8,
    pub bpp: f64,
    pub psnr: Psnr,
    pub linf: u8,
}

impl SweepRow {
    pub fn csv(&self) -> String {
        format!("{},{:.4},{},{}", self.tau, self.bpp, self.psnr, self.linf)
    }
}

/// Encodes and independently decodes `img` at every tau in the range.
pub fn sweep(img: &Image, taus: std::ops::RangeInclusive<u8>) -> Result<Vec<SweepRow>, DecodeError> {
    taus.collect::<Vec<_>>()
        .into_par_iter()
        .map(|tau| {
            let enc = encode_image(img, CodecConfig::new(tau).expect("validated tau"));
            let bytes = enc.bitstream.to_bytes();
            let decoded = decode_image(&Bitstream::from_bytes(&bytes)?)?;
            Ok(SweepRow {
                tau,
                bpp: (bytes.len() * 8) as f64 / img.len().max(1) as f64,
                psnr: psnr(img, &decoded).expect("same dimensions"),
                linf: linf_error(img, &decoded).expect("same dimensions"),
            })
        })
        .collect()
}

fn execute(command: Command, out: &mut dyn Write) -> Result<(), CliError> {
    let emit = |out: &mut dyn Write, line: String| {
        writeln!(out, "{line}").map_err(|source| CliError::Io { path: "<stdout>".into(), source })
    };
    match command {
        Command::Encode { tau, input, output } => {
            let img = load_image(&input)?;
            let enc = encode_image(&img, CodecConfig::new(tau).expect("validated tau"));
            write(&output, &enc.bitstream.to_bytes())?;
            emit(out, format!("bpp={:.4} linf={}", enc.bpp, enc.achieved_linf))
        }
        Command::Decode { input, output } => {
            let (_, img) = hard_decode(&input)?;
            write(&output, &write_pgm(&img))
        }
        Command::SoftDecode { input, weights, output } => {
            let net = load_network(&weights)?;
            let (stream, y) = hard_decode(&input)?;
            let x_hat = soft(&net, &y, stream.header.tau)?;
            write(&output, &write_pgm(&x_hat))
        }
        Command::Metrics { reference, test } => {
            let a = load_image(&reference)?;
            let b = load_image(&test)?;
            dims_match(&a, &b)?;
            let p = psnr(&a, &b).expect("dimensions checked");
            let l = linf_error(&a, &b).expect("dimensions checked");
            emit(out, format!("psnr={p} linf={l}"))
        }
        Command::Verify { input, reference, soft: weights } => {
            let reference = load_image(&reference)?;
            let (stream, y) = hard_decode(&input)?;
            dims_match(&reference, &y)?;
            let tau = stream.header.tau;
            let mut ok = true;
            let hard_linf = linf_error(&reference, &y).expect("dimensions checked");
            ok &= hard_linf <= tau;
            emit(out, format!("hard linf={hard_linf} bound={tau} {}", verdict(hard_linf <= tau)))?;
            if let Some(path) = weights {
                let x_hat = soft(&load_network(&path)?, &y, tau)?;
                let soft_linf = linf_error(&reference, &x_hat).expect("dimensions checked");
                let bound = 2 * tau;
                ok &= soft_linf <= bound;
                emit(out, format!("soft linf={soft_linf} bound={bound} {}", verdict(soft_linf <= bound)))?;
            }
            if ok {
                Ok(())
            } else {
                Err(CliError::Violation)
            }
        }
        Command::Sweep { tau_min, tau_max, reference } => {
            if tau_min > tau_max {
                return Err(CliError::Invalid(format!("--tau-min {tau_min} exceeds --tau-max {tau_max}")));
            }
            let img = load_image(&reference)?;
            let rows = sweep(&img, tau_min..=tau_max)
                .map_err(|source| CliError::Stream { path: reference.clone(), source })?;
            emit(out, SWEEP_HEADER.to_owned())?;
            rows.iter().try_for_each(|row| emit(out, row.csv()))
        }
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "violated"
    }
}

/// Runs the CLI with explicit output sinks and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = write!(err, "{}", e.render());
            return if code == 0 { EXIT_OK } else { EXIT_USAGE };
        }
    };
    match execute(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "nlc: {e}");
            e.exit_code()
        }
    }
}
