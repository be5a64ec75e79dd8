//! Dense `[channels, height, width]` f32 tensors and the convolution kernels
//! used by the soft decoder.
//!
//! Every output element of [`conv2d`] is accumulated as
//! `bias + Σ_i Σ_ky Σ_kx input·weight` in exactly that order, so results do
//! not depend on how the work is split across threads.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::ShapeError;

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<f32>,
}

impl Tensor {
    pub fn new(channels: usize, height: usize, width: usize, data: Vec<f32>) -> Result<Self, ShapeError> {
        if data.len() != channels * height * width {
            return Err(ShapeError::BufferLength { expected: channels * height * width, actual: data.len() });
        }
        Ok(Self { channels, height, width, data })
    }

    pub fn zeros(channels: usize, height: usize, width: usize) -> Self {
        Self::filled(channels, height, width, 0.0)
    }

    pub fn filled(channels: usize, height: usize, width: usize, value: f32) -> Self {
        Self { channels, height, width, data: vec![value; channels * height * width] }
    }

    #[inline]
    pub fn shape(&self) -> [usize; 3] {
        [self.channels, self.height, self.width]
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.channels
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn data(&self) -> &[f32] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn get(&self, c: usize, y: usize, x: usize) -> f32 {
        self.data[(c * self.height + y) * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, c: usize, y: usize, x: usize, v: f32) {
        self.data[(c * self.height + y) * self.width + x] = v;
    }

    pub fn channel(&self, c: usize) -> &[f32] {
        let plane = self.height * self.width;
        &self.data[c * plane..(c + 1) * plane]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Elementwise sum of two same-shaped tensors.
    pub fn add(&self, other: &Tensor) -> Result<Tensor, ShapeError> {
        if self.shape() != other.shape() {
            return Err(ShapeError::Tensor("add operands differ in shape"));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Tensor { channels: self.channels, height: self.height, width: self.width, data })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Padding {
    /// `dilation·(k-1)/2` zeros on each side; kernel sides must be odd.
    Same,
    Explicit(usize),
}

/// Weights `[out_c, in_c, kh, kw]`, one bias per output channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvParams {
    out_channels: usize,
    in_channels: usize,
    kernel_h: usize,
    kernel_w: usize,
    weights: Vec<f32>,
    bias: Vec<f32>,
    pub stride: usize,
    pub dilation: usize,
    pub padding: Padding,
}

impl ConvParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        out_channels: usize,
        in_channels: usize,
        kernel_h: usize,
        kernel_w: usize,
        weights: Vec<f32>,
        bias: Vec<f32>,
        stride: usize,
        dilation: usize,
        padding: Padding,
    ) -> Result<Self, ShapeError> {
        let expected = out_channels * in_channels * kernel_h * kernel_w;
        if weights.len() != expected {
            return Err(ShapeError::BufferLength { expected, actual: weights.len() });
        }
        if bias.len() != out_channels {
            return Err(ShapeError::BufferLength { expected: out_channels, actual: bias.len() });
        }
        if stride == 0 || dilation == 0 || kernel_h == 0 || kernel_w == 0 {
            return Err(ShapeError::Tensor("stride, dilation and kernel sides must be positive"));
        }
        if padding == Padding::Same && (kernel_h % 2 == 0 || kernel_w % 2 == 0) {
            return Err(ShapeError::Tensor("same padding needs odd kernel sides"));
        }
        Ok(Self { out_channels, in_channels, kernel_h, kernel_w, weights, bias, stride, dilation, padding })
    }

    /// Zero-initialised `k×k` convolution with same padding.
    pub fn zeros(out_channels: usize, in_channels: usize, k: usize, stride: usize, dilation: usize) -> Self {
        Self::new(
            out_channels,
            in_channels,
            k,
            k,
            vec![0.0; out_channels * in_channels * k * k],
            vec![0.0; out_channels],
            stride,
            dilation,
            Padding::Same,
        )
        .expect("consistent zero parameters")
    }

    pub fn out_channels(&self) -> usize {
        self.out_channels
    }

    pub fn in_channels(&self) -> usize {
        self.in_channels
    }

    pub fn kernel(&self) -> (usize, usize) {
        (self.kernel_h, self.kernel_w)
    }

    pub fn weights(&self) -> &[f32] {
        &self.weights
    }

    pub fn bias(&self) -> &[f32] {
        &self.bias
    }

    #[inline]
    pub fn weight(&self, o: usize, i: usize, ky: usize, kx: usize) -> f32 {
        self.weights[((o * self.in_channels + i) * self.kernel_h + ky) * self.kernel_w + kx]
    }

    /// Zero padding `(top/bottom, left/right)`.
    pub fn pads(&self) -> (usize, usize) {
        match self.padding {
            Padding::Same => (self.dilation * (self.kernel_h - 1) / 2, self.dilation * (self.kernel_w - 1) / 2),
            Padding::Explicit(p) => (p, p),
        }
    }

    /// Output spatial size for an `h×w` input, `None` if the kernel does not fit.
    pub fn output_size(&self, h: usize, w: usize) -> Option<(usize, usize)> {
        let (ph, pw) = self.pads();
        let span_h = self.dilation * (self.kernel_h - 1) + 1;
        let span_w = self.dilation * (self.kernel_w - 1) + 1;
        let oh = (h + 2 * ph).checked_sub(span_h)? / self.stride + 1;
        let ow = (w + 2 * pw).checked_sub(span_w)? / self.stride + 1;
        Some((oh, ow))
    }
}

/// Range of output columns whose input tap `x·stride + offset - pad` falls
/// inside `[0, len)`.
#[inline]
fn valid_range(out_len: usize, len: usize, stride: usize, offset: usize, pad: usize) -> (usize, usize) {
    let lo = pad.saturating_sub(offset).div_ceil(stride);
    // largest x with x·stride + offset - pad <= len - 1
    let hi = if len + pad > offset { ((len + pad - offset - 1) / stride + 1).min(out_len) } else { 0 };
    (lo.min(hi), hi)
}

fn conv_channel(input: &Tensor, p: &ConvParams, o: usize, out: &mut [f32], oh: usize, ow: usize) {
    let (ph, pw) = p.pads();
    let (h, w) = (input.height, input.width);
    out.fill(p.bias[o]);
    for i in 0..p.in_channels {
        let plane = input.channel(i);
        for ky in 0..p.kernel_h {
            let (y_lo, y_hi) = valid_range(oh, h, p.stride, ky * p.dilation, ph);
            for kx in 0..p.kernel_w {
                let weight = p.weight(o, i, ky, kx);
                let (x_lo, x_hi) = valid_range(ow, w, p.stride, kx * p.dilation, pw);
                if x_lo >= x_hi {
                    continue;
                }
                for oy in y_lo..y_hi {
                    let iy = oy * p.stride + ky * p.dilation - ph;
                    let src = &plane[iy * w..(iy + 1) * w];
                    let dst = &mut out[oy * ow..(oy + 1) * ow];
                    if p.stride == 1 {
                        let shift = x_lo + kx * p.dilation - pw;
                        for (d, s) in dst[x_lo..x_hi].iter_mut().zip(&src[shift..]) {
                            *d += weight * s;
                        }
                    } else {
                        for (ox, d) in dst.iter_mut().enumerate().take(x_hi).skip(x_lo) {
                            *d += weight * src[ox * p.stride + kx * p.dilation - pw];
                        }
                    }
                }
            }
        }
    }
}

/// Zero-padded strided, dilated 2-D convolution.
pub fn conv2d(input: &Tensor, p: &ConvParams) -> Result<Tensor, ShapeError> {
    if input.channels != p.in_channels {
        return Err(ShapeError::Tensor("input channels do not match the kernel"));
    }
    let (oh, ow) = p
        .output_size(input.height, input.width)
        .ok_or(ShapeError::Tensor("kernel larger than the padded input"))?;
    let mut out = Tensor::zeros(p.out_channels, oh, ow);
    let plane = oh * ow;
    if plane == 0 {
        return Ok(out);
    }

    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        out.data
            .par_chunks_mut(plane)
            .enumerate()
            .for_each(|(o, chunk)| conv_channel(input, p, o, chunk, oh, ow));
    }
    #[cfg(not(feature = "parallel"))]
    for (o, chunk) in out.data.chunks_mut(plane).enumerate() {
        conv_channel(input, p, o, chunk, oh, ow);
    }
    Ok(out)
}

/// Nearest-neighbour 2× upsampling: `out[c, y, x] = in[c, y/2, x/2]`.
pub fn upsample2x(input: &Tensor) -> Tensor {
    let (h, w) = (input.height * 2, input.width * 2);
    let mut data = Vec::with_capacity(input.channels * h * w);
    for c in 0..input.channels {
        let plane = input.channel(c);
        for y in 0..h {
            let row = &plane[(y / 2) * input.width..(y / 2 + 1) * input.width];
            for x in 0..w {
                data.push(row[x / 2]);
            }
        }
    }
    Tensor { channels: input.channels, height: h, width: w, data }
}

pub fn relu(input: &Tensor) -> Tensor {
    let mut out = input.clone();
    relu_in_place(&mut out);
    out
}

pub fn relu_in_place(t: &mut Tensor) {
    for v in &mut t.data {
        *v = v.max(0.0);
    }
}
