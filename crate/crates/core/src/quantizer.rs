//! Uniform residual quantization with a per-pixel error bound `τ`.
//!
//! Residuals are mapped to bins of width `2τ+1` centred on multiples of the
//! step, which keeps `|e - ê| <= τ`. The negative branch rounds toward zero so
//! that the bound also holds for negative residuals.

use crate::error::ShapeError;

/// Largest supported error bound.
pub const MAX_TAU: u8 = 8;

/// Predictor identifiers as stored in the container header.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[repr(u8)]
pub enum PredictorId {
    #[default]
    Gap = 0,
}

impl PredictorId {
    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            0 => Some(PredictorId::Gap),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct CodecConfig {
    tau: u8,
    pub predictor: PredictorId,
}

impl CodecConfig {
    pub fn new(tau: u8) -> Result<Self, ShapeError> {
        if tau > MAX_TAU {
            return Err(ShapeError::Tau(tau));
        }
        Ok(Self { tau, predictor: PredictorId::Gap })
    }

    /// Lossless configuration.
    pub fn lossless() -> Self {
        Self { tau: 0, predictor: PredictorId::Gap }
    }

    #[inline]
    pub fn tau(&self) -> u8 {
        self.tau
    }
}

/// A transmitted quantization index together with the residual it decodes to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuantizedResidual {
    pub index: i32,
    pub value: i32,
}

#[inline]
pub fn step(tau: u8) -> i32 {
    2 * i32::from(tau) + 1
}

/// Quantizes a prediction residual: `ê = sign(e)·(2τ+1)·⌊(|e|+τ)/(2τ+1)⌋`.
#[inline]
pub fn quantize(e: i32, tau: u8) -> QuantizedResidual {
    let step = step(tau);
    let magnitude = (e.abs() + i32::from(tau)) / step;
    let index = if e < 0 { -magnitude } else { magnitude };
    QuantizedResidual { index, value: index * step }
}

/// Residual value carried by a quantization index.
#[inline]
pub fn dequantize(index: i32, tau: u8) -> i64 {
    i64::from(index) * i64::from(step(tau))
}

/// `clamp(prediction + ê, 0, 255)`.
#[inline]
pub fn reconstruct_pixel(prediction: u8, value: i64) -> u8 {
    (i64::from(prediction) + value).clamp(0, 255) as u8
}
