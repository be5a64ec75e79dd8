//! Raster-order near-lossless encoder and decoder.

use alloc::vec;

use crate::entropy::{select_context, Bitstream, Header, SymbolDecoder, SymbolEncoder};
use crate::error::DecodeError;
use crate::image::Image;
use crate::predictor::{predict, window_unchecked};
use crate::quantizer::{dequantize, quantize, reconstruct_pixel, CodecConfig};

#[derive(Debug, Clone)]
pub struct EncodeResult {
    pub bitstream: Bitstream,
    /// Encoder-side reconstruction, identical to what `decode_image` returns.
    pub reconstruction: Image,
    pub bpp: f64,
    /// Largest `|x - y|` observed while encoding.
    pub achieved_linf: u8,
}

/// Encodes `x` pixel by pixel. Predictions and contexts are formed from the
/// reconstructed plane, never from `x`.
///
/// # Panics
///
/// If either dimension exceeds `u32::MAX`.
pub fn encode_image(x: &Image, cfg: CodecConfig) -> EncodeResult {
    let (width, height) = (x.width(), x.height());
    let header = Header {
        width: u32::try_from(width).expect("width fits the container"),
        height: u32::try_from(height).expect("height fits the container"),
        tau: cfg.tau(),
        predictor: cfg.predictor,
    };
    let tau = cfg.tau();
    let mut recon = vec![0u8; x.len()];
    let mut coder = SymbolEncoder::new();
    let mut achieved_linf = 0u8;

    for row in 0..height {
        for col in 0..width {
            let i = row * width + col;
            let win = window_unchecked(&recon, width, row, col);
            let pred = predict(&win);
            let residual = i32::from(x.pixels()[i]) - i32::from(pred);
            let q = quantize(residual, tau);
            let y = reconstruct_pixel(pred, i64::from(q.value));
            coder.encode(q.index, select_context(&win));
            achieved_linf = achieved_linf.max(y.abs_diff(x.pixels()[i]));
            recon[i] = y;
        }
    }

    let bitstream = Bitstream { header, payload: coder.finish() };
    let bpp = bitstream.bpp();
    let reconstruction = Image::new(width, height, recon).expect("same dimensions as input");
    EncodeResult { bitstream, reconstruction, bpp, achieved_linf }
}

/// Hard-decodes a stream. Either the whole image is returned or an error.
pub fn decode_image(stream: &Bitstream) -> Result<Image, DecodeError> {
    let header = stream.header;
    let (width, height) = (header.width as usize, header.height as usize);
    let count = header.pixel_count();
    let mut coder = SymbolDecoder::new(&stream.payload, count)?;
    let mut recon = vec![0u8; count];

    for row in 0..height {
        for col in 0..width {
            let win = window_unchecked(&recon, width, row, col);
            let pred = predict(&win);
            let index = coder.decode(select_context(&win))?;
            recon[row * width + col] = reconstruct_pixel(pred, dequantize(index, header.tau));
        }
    }
    coder.finish()?;
    Ok(Image::new(width, height, recon).expect("buffer sized from header"))
}
