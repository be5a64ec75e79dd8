//! PSNR and maximum absolute error between two images.

use core::fmt;

use crate::error::ShapeError;
use crate::image::Image;

const PEAK_SQUARED: f64 = 255.0 * 255.0;

/// Peak signal-to-noise ratio; identical images have no finite value.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum Psnr {
    Finite(f64),
    Infinite,
}

impl Psnr {
    pub fn from_mse(mse: f64) -> Self {
        if mse == 0.0 {
            Psnr::Infinite
        } else {
            Psnr::Finite(10.0 * libm::log10(PEAK_SQUARED / mse))
        }
    }

    /// Decibels, with `f64::INFINITY` for identical images.
    pub fn db(self) -> f64 {
        match self {
            Psnr::Finite(db) => db,
            Psnr::Infinite => f64::INFINITY,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Psnr::Infinite)
    }
}

/// Formats as `inf` or with four decimals.
impl fmt::Display for Psnr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Psnr::Infinite => f.write_str("inf"),
            Psnr::Finite(db) => write!(f, "{db:.4}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub psnr: Psnr,
    pub linf: u8,
    pub bpp: f64,
}

impl MetricsReport {
    pub fn compare(reference: &Image, test: &Image, bpp: f64) -> Result<Self, ShapeError> {
        Ok(Self { psnr: psnr(reference, test)?, linf: linf_error(reference, test)?, bpp })
    }
}

pub fn mse(a: &Image, b: &Image) -> Result<f64, ShapeError> {
    a.check_same_dims(b)?;
    if a.is_empty() {
        return Ok(0.0);
    }
    let sum: u64 = a
        .pixels()
        .iter()
        .zip(b.pixels())
        .map(|(&p, &q)| {
            let d = u64::from(p.abs_diff(q));
            d * d
        })
        .sum();
    Ok(sum as f64 / a.len() as f64)
}

pub fn psnr(a: &Image, b: &Image) -> Result<Psnr, ShapeError> {
    mse(a, b).map(Psnr::from_mse)
}

pub fn linf_error(a: &Image, b: &Image) -> Result<u8, ShapeError> {
    a.check_same_dims(b)?;
    Ok(a.pixels().iter().zip(b.pixels()).map(|(&p, &q)| p.abs_diff(q)).max().unwrap_or(0))
}
