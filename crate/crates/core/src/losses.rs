//! Loss family for bounded-error restoration, in 8-bit pixel units.
//!
//! Estimates are passed as flat raster planes of any float type; the reference
//! is the original [`Image`]. All sums are taken in `f64`.

use crate::error::ShapeError;
use crate::image::Image;
use crate::tensor::Tensor;

/// Default weight of the quasi-l-infinity term in [`joint_loss`].
pub const DEFAULT_LAMBDA: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossReport {
    pub l2: f64,
    pub l_trunc: f64,
    pub l_qinf: f64,
    pub l_joint: f64,
    pub lambda: f64,
}

impl LossReport {
    pub fn compute<T: Copy + Into<f64>>(estimate: &[T], x: &Image, tau: u8, lambda: f64) -> Result<Self, ShapeError> {
        let l2 = l2_loss(estimate, x)?;
        let l_qinf = quasi_linf_loss(estimate, x, tau)?;
        Ok(Self { l2, l_trunc: truncated_l2_loss(estimate, x, tau)?, l_qinf, l_joint: l2 + lambda * l_qinf, lambda })
    }
}

/// `max(e² - τ², 0)` for a single pixel error.
#[inline]
pub fn truncated_l2_penalty(e: f64, tau: u8) -> f64 {
    let t = f64::from(tau);
    (e * e - t * t).max(0.0)
}

/// `max(e⁴ - τ⁴, 0)` for a single pixel error.
#[inline]
pub fn quasi_linf_penalty(e: f64, tau: u8) -> f64 {
    let t2 = f64::from(tau) * f64::from(tau);
    let e2 = e * e;
    (e2 * e2 - t2 * t2).max(0.0)
}

fn check_len(len: usize, x: &Image) -> Result<(), ShapeError> {
    if len != x.len() {
        return Err(ShapeError::BufferLength { expected: x.len(), actual: len });
    }
    Ok(())
}

fn mean_penalty<T: Copy + Into<f64>>(estimate: &[T], x: &Image, penalty: impl Fn(f64) -> f64) -> Result<f64, ShapeError> {
    check_len(estimate.len(), x)?;
    if x.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = estimate.iter().zip(x.pixels()).map(|(&v, &p)| penalty(v.into() - f64::from(p))).sum();
    Ok(sum / x.len() as f64)
}

pub fn l2_loss<T: Copy + Into<f64>>(estimate: &[T], x: &Image) -> Result<f64, ShapeError> {
    mean_penalty(estimate, x, |e| e * e)
}

pub fn truncated_l2_loss<T: Copy + Into<f64>>(estimate: &[T], x: &Image, tau: u8) -> Result<f64, ShapeError> {
    mean_penalty(estimate, x, |e| truncated_l2_penalty(e, tau))
}

pub fn quasi_linf_loss<T: Copy + Into<f64>>(estimate: &[T], x: &Image, tau: u8) -> Result<f64, ShapeError> {
    mean_penalty(estimate, x, |e| quasi_linf_penalty(e, tau))
}

/// `l2 + lambda · quasi_linf`.
pub fn joint_loss<T: Copy + Into<f64>>(estimate: &[T], x: &Image, tau: u8, lambda: f64) -> Result<f64, ShapeError> {
    Ok(l2_loss(estimate, x)? + lambda * quasi_linf_loss(estimate, x, tau)?)
}

/// Gradient of [`quasi_linf_loss`] with respect to each estimate pixel:
/// `4e³/WH` where `|e| > τ`, zero elsewhere.
pub fn quasi_linf_grad<T: Copy + Into<f64>>(estimate: &[T], x: &Image, tau: u8) -> Result<Tensor, ShapeError> {
    check_len(estimate.len(), x)?;
    let scale = 4.0 / x.len().max(1) as f64;
    let t = f64::from(tau);
    let data = estimate
        .iter()
        .zip(x.pixels())
        .map(|(&v, &p)| {
            let e = v.into() - f64::from(p);
            if e.abs() > t {
                (scale * e * e * e) as f32
            } else {
                0.0
            }
        })
        .collect();
    Tensor::new(1, x.height(), x.width(), data)
}
