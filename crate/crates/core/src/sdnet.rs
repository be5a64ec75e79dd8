//! The soft-decoding network and the bounded soft decoder built on it.
//!
//! Graph, for `C = base_channels`:
//!
//! ```text
//! [y/255, τ/8] ─ head 3×3 (2→C) ─ down block (stride 2) ─ num_blocks × dilated block
//!              ─ up block (×2) ─ tail 3×3 (C→1) ─ ×255 ─ + y ─▶ estimate
//! ```
//!
//! [`soft_decode`] clamps the estimate into `[y-τ, y+τ]`, so whatever the
//! weights, every output pixel is within `τ` of the hard-decoded input.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{ShapeError, WeightsError};
use crate::image::Image;
use crate::nn::{truncated_activation, DilatedResidualBlock, DownsampledResidualBlock, UpsampledResidualBlock};
use crate::quantizer::MAX_TAU;
use crate::tensor::{conv2d, ConvParams, Padding, Tensor};

const INPUT_CHANNELS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Arch {
    pub num_blocks: u16,
    pub base_channels: u16,
    pub dilation: u16,
}

impl Default for Arch {
    fn default() -> Self {
        Self { num_blocks: 8, base_channels: 64, dilation: 2 }
    }
}

impl Arch {
    fn validate(&self) -> Result<(), WeightsError> {
        if self.base_channels == 0 {
            return Err(WeightsError::Arch("base_channels must be positive"));
        }
        if self.dilation == 0 {
            return Err(WeightsError::Arch("dilation must be positive"));
        }
        Ok(())
    }

    /// Names and shapes of every tensor, in file order.
    pub fn layout(&self) -> Vec<(String, Vec<usize>)> {
        let c = usize::from(self.base_channels);
        let mut out = Vec::new();
        let mut conv = |prefix: &str, out_c: usize, in_c: usize, k: usize| {
            out.push((format!("{prefix}.weight"), vec![out_c, in_c, k, k]));
            out.push((format!("{prefix}.bias"), vec![out_c]));
        };
        conv("head", c, INPUT_CHANNELS, 3);
        conv("down.conv1", c, c, 3);
        conv("down.conv2", c, c, 3);
        conv("down.skip", c, c, 1);
        for i in 0..self.num_blocks {
            conv(&format!("blocks.{i}.conv1"), c, c, 3);
            conv(&format!("blocks.{i}.conv2"), c, c, 3);
        }
        conv("up.conv1", c, c, 3);
        conv("up.conv2", c, c, 3);
        conv("tail", 1, c, 3);
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedTensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub values: Vec<f32>,
}

/// Architecture plus its tensors; construction checks that they agree.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelWeights {
    arch: Arch,
    tensors: Vec<NamedTensor>,
}

impl ModelWeights {
    pub fn new(arch: Arch, tensors: Vec<NamedTensor>) -> Result<Self, WeightsError> {
        arch.validate()?;
        let layout = arch.layout();
        if layout.len() != tensors.len() {
            return Err(WeightsError::TensorCount { expected: layout.len(), actual: tensors.len() });
        }
        for (index, ((name, shape), t)) in layout.iter().zip(&tensors).enumerate() {
            if *name != t.name {
                return Err(WeightsError::Name { index, expected: name.clone(), actual: t.name.clone() });
            }
            if *shape != t.shape || t.values.len() != shape.iter().product::<usize>() {
                return Err(WeightsError::Shape { name: t.name.clone() });
            }
            if t.values.iter().any(|v| !v.is_finite()) {
                return Err(WeightsError::NonFinite { name: t.name.clone() });
            }
        }
        Ok(Self { arch, tensors })
    }

    /// Builds every tensor from `f(name, flat_index)`.
    pub fn from_fn(arch: Arch, mut f: impl FnMut(&str, usize) -> f32) -> Result<Self, WeightsError> {
        let tensors = arch
            .layout()
            .into_iter()
            .map(|(name, shape)| {
                let n = shape.iter().product();
                let values = (0..n).map(|i| f(&name, i)).collect();
                NamedTensor { name, shape, values }
            })
            .collect();
        Self::new(arch, tensors)
    }

    pub fn zeros(arch: Arch) -> Result<Self, WeightsError> {
        Self::from_fn(arch, |_, _| 0.0)
    }

    pub fn arch(&self) -> Arch {
        self.arch
    }

    pub fn tensors(&self) -> &[NamedTensor] {
        &self.tensors
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors.iter().map(|t| t.values.len()).sum()
    }

    /// CRC-32 over every value as little-endian f32 bytes, in tensor order.
    pub fn checksum(&self) -> u32 {
        let mut h = crc32fast::Hasher::new();
        for t in &self.tensors {
            for v in &t.values {
                h.update(&v.to_le_bytes());
            }
        }
        h.finalize()
    }
}

/// Executable form of a [`ModelWeights`].
#[derive(Debug, Clone)]
pub struct Sdnet {
    head: ConvParams,
    down: DownsampledResidualBlock,
    blocks: Vec<DilatedResidualBlock>,
    up: UpsampledResidualBlock,
    tail: ConvParams,
}

impl Sdnet {
    pub fn new(m: &ModelWeights) -> Self {
        let c = usize::from(m.arch.base_channels);
        let d = usize::from(m.arch.dilation);
        let mut tensors = m.tensors.iter();
        let mut conv = |out_c: usize, in_c: usize, k: usize, stride: usize, dilation: usize| {
            let w = tensors.next().expect("validated layout");
            let b = tensors.next().expect("validated layout");
            ConvParams::new(out_c, in_c, k, k, w.values.clone(), b.values.clone(), stride, dilation, Padding::Same)
                .expect("validated layout")
        };
        let head = conv(c, INPUT_CHANNELS, 3, 1, 1);
        let down = DownsampledResidualBlock { conv1: conv(c, c, 3, 2, 1), conv2: conv(c, c, 3, 1, 1), skip: conv(c, c, 1, 2, 1) };
        let blocks = (0..m.arch.num_blocks)
            .map(|_| DilatedResidualBlock { conv1: conv(c, c, 3, 1, d), conv2: conv(c, c, 3, 1, d) })
            .collect();
        let up = UpsampledResidualBlock { conv1: conv(c, c, 3, 1, 1), conv2: conv(c, c, 3, 1, 1) };
        let tail = conv(1, c, 3, 1, 1);
        Self { head, down, blocks, up, tail }
    }

    /// Network output in normalized units for an even-sized input tensor.
    pub fn residual(&self, input: &Tensor) -> Result<Tensor, ShapeError> {
        let mut x = conv2d(input, &self.head)?;
        x = self.down.forward(&x)?;
        for block in &self.blocks {
            x = block.forward(&x)?;
        }
        x = self.up.forward(&x)?;
        conv2d(&x, &self.tail)
    }

    /// Pre-truncation estimate in pixel units, same size as `y`.
    pub fn forward(&self, y: &Image, tau: u8) -> Result<Tensor, ShapeError> {
        if tau > MAX_TAU {
            return Err(ShapeError::Tau(tau));
        }
        if y.is_empty() {
            return Tensor::new(1, y.height(), y.width(), Vec::new());
        }
        let padded = reflect_pad_even(y);
        let input = network_input(&padded, tau);
        let residual = self.residual(&input)?;
        let data = (0..y.height())
            .flat_map(|r| (0..y.width()).map(move |c| (r, c)))
            .map(|(r, c)| f32::from(y.get(r, c)) + 255.0 * residual.get(0, r, c))
            .collect();
        Tensor::new(1, y.height(), y.width(), data)
    }

    /// Bounded soft decode: every output pixel is within `τ` of `y`.
    pub fn soft_decode(&self, y: &Image, tau: u8) -> Result<Image, ShapeError> {
        let estimate = self.forward(y, tau)?;
        let clamped = truncated_activation(&estimate, y, tau)?;
        let tau = i32::from(tau);
        let pixels = clamped
            .data()
            .iter()
            .zip(y.pixels())
            .map(|(&v, &p)| {
                let p = i32::from(p);
                let lo = (p - tau).max(0);
                let hi = (p + tau).min(255);
                // round half away from zero, then back into the band
                (libm::roundf(v) as i32).clamp(lo, hi) as u8
            })
            .collect();
        Image::new(y.width(), y.height(), pixels)
    }
}

/// Two input planes: `y/255` and the constant `τ/8`.
pub fn network_input(y: &Image, tau: u8) -> Tensor {
    let mut data = Vec::with_capacity(2 * y.len());
    data.extend(y.pixels().iter().map(|&p| f32::from(p) / 255.0));
    data.extend(core::iter::repeat_n(f32::from(tau) / f32::from(MAX_TAU), y.len()));
    Tensor::new(INPUT_CHANNELS, y.height(), y.width(), data).expect("sized from image")
}

/// Appends one mirrored row and/or column (excluding the edge itself) so
/// both dimensions become even.
pub fn reflect_pad_even(y: &Image) -> Image {
    let (h, w) = (y.height(), y.width());
    let (ph, pw) = (h + h % 2, w + w % 2);
    if (ph, pw) == (h, w) {
        return y.clone();
    }
    let mirror = |i: usize, n: usize| if i < n { i } else { n.saturating_sub(2) };
    Image::from_fn(pw, ph, |r, c| y.get(mirror(r, h), mirror(c, w)))
}

pub fn forward(y: &Image, tau: u8, m: &ModelWeights) -> Result<Tensor, WeightsError> {
    Ok(Sdnet::new(m).forward(y, tau)?)
}

pub fn soft_decode(y: &Image, tau: u8, m: &ModelWeights) -> Result<Image, WeightsError> {
    Ok(Sdnet::new(m).soft_decode(y, tau)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::linf_error;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn small() -> Arch {
        Arch { num_blocks: 2, base_channels: 4, dilation: 2 }
    }

    fn random_weights(arch: Arch, seed: u64, scale: f32) -> ModelWeights {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ModelWeights::from_fn(arch, |_, _| rng.gen_range(-scale..scale)).unwrap()
    }

    fn random_image(rng: &mut ChaCha8Rng, w: usize, h: usize) -> Image {
        Image::from_fn(w, h, |_, _| rng.gen())
    }

    #[test]
    fn default_arch_layout() {
        let layout = Arch::default().layout();
        assert_eq!(layout.len(), 2 * (1 + 3 + 16 + 2 + 1));
        assert_eq!(layout[0], ("head.weight".into(), vec![64, 2, 3, 3]));
        assert_eq!(layout.last().unwrap(), &("tail.bias".into(), vec![1]));
        assert!(layout.iter().any(|(n, _)| n == "blocks.7.conv2.weight"));
        let params: usize = layout.iter().map(|(_, s)| s.iter().product::<usize>()).sum();
        // about 0.75M parameters, roughly 3 MB as f32
        // 1216 + 73856 + 4160 + 8·73856 + 73856 + 577
        assert_eq!(params, 744_513);
    }

    #[test]
    fn weights_validation() {
        let arch = small();
        let good = ModelWeights::zeros(arch).unwrap();
        let mut tensors = good.tensors().to_vec();
        tensors.pop();
        assert!(matches!(ModelWeights::new(arch, tensors), Err(WeightsError::TensorCount { .. })));

        let mut tensors = good.tensors().to_vec();
        tensors[3].values.push(0.0);
        tensors[3].shape[0] += 0;
        assert!(matches!(ModelWeights::new(arch, tensors), Err(WeightsError::Shape { .. })));

        let mut tensors = good.tensors().to_vec();
        tensors.swap(0, 1);
        assert!(matches!(ModelWeights::new(arch, tensors), Err(WeightsError::Name { index: 0, .. })));

        let mut tensors = good.tensors().to_vec();
        tensors[2].values[0] = f32::NAN;
        assert!(matches!(ModelWeights::new(arch, tensors), Err(WeightsError::NonFinite { .. })));

        let seven = Arch { num_blocks: 7, ..Arch::default() };
        let eight = ModelWeights::zeros(Arch::default()).unwrap();
        assert!(ModelWeights::new(seven, eight.tensors().to_vec()).is_err());
        let eight_claimed = ModelWeights::zeros(seven).unwrap();
        assert!(matches!(
            ModelWeights::new(Arch::default(), eight_claimed.tensors().to_vec()),
            Err(WeightsError::TensorCount { .. })
        ));
    }

    #[test]
    fn zero_network_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let y = random_image(&mut rng, 10, 6);
        let m = ModelWeights::zeros(small()).unwrap();
        let est = forward(&y, 3, &m).unwrap();
        let expected: Vec<f32> = y.pixels().iter().map(|&p| f32::from(p)).collect();
        assert_eq!(est.data(), &expected[..]);
        assert_eq!(soft_decode(&y, 3, &m).unwrap(), y);
    }

    #[test]
    fn output_matches_input_shape() {
        let m = random_weights(small(), 1, 0.3);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for (w, h) in [(8, 8), (6, 10), (7, 5), (1, 1), (3, 2)] {
            let y = random_image(&mut rng, w, h);
            assert_eq!(forward(&y, 2, &m).unwrap().shape(), [1, h, w]);
            assert_eq!(soft_decode(&y, 2, &m).unwrap().width(), w);
        }
    }

    #[test]
    fn soft_decode_stays_in_band() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for seed in 0..6 {
            let m = random_weights(small(), seed, 2.0);
            let y = random_image(&mut rng, 12, 9);
            for tau in 0..=8 {
                let x_hat = soft_decode(&y, tau, &m).unwrap();
                assert!(linf_error(&x_hat, &y).unwrap() <= tau);
                if tau == 0 {
                    assert_eq!(x_hat, y);
                }
            }
        }
    }

    #[test]
    fn tau_out_of_range() {
        let m = ModelWeights::zeros(small()).unwrap();
        assert!(soft_decode(&Image::filled(4, 4, 1), 9, &m).is_err());
    }

    #[test]
    fn reflect_padding() {
        let y = Image::from_fn(3, 3, |r, c| (r * 3 + c) as u8);
        let p = reflect_pad_even(&y);
        assert_eq!((p.width(), p.height()), (4, 4));
        assert_eq!(p.get(0, 3), y.get(0, 1));
        assert_eq!(p.get(3, 0), y.get(1, 0));
        assert_eq!(p.get(3, 3), y.get(1, 1));
        let one = reflect_pad_even(&Image::filled(1, 1, 9));
        assert_eq!(one, Image::filled(2, 2, 9));
    }

    #[test]
    fn checksum_tracks_values() {
        let a = random_weights(small(), 3, 1.0);
        let mut tensors = a.tensors().to_vec();
        tensors[5].values[0] += 1.0;
        let b = ModelWeights::new(small(), tensors).unwrap();
        assert_ne!(a.checksum(), b.checksum());
        assert_eq!(a.checksum(), a.clone().checksum());
    }
}
