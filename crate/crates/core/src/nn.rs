//! Residual building blocks of the soft decoder and the truncated output
//! activation.

use alloc::vec::Vec;

use crate::error::ShapeError;
use crate::image::Image;
use crate::tensor::{conv2d, relu_in_place, upsample2x, ConvParams, Tensor};

/// `input + conv2(relu(conv1(input)))` with dilated 3×3 convolutions.
#[derive(Debug, Clone, PartialEq)]
pub struct DilatedResidualBlock {
    pub conv1: ConvParams,
    pub conv2: ConvParams,
}

impl DilatedResidualBlock {
    pub fn forward(&self, input: &Tensor) -> Result<Tensor, ShapeError> {
        dilated_residual_block(input, &self.conv1, &self.conv2)
    }
}

pub fn dilated_residual_block(input: &Tensor, p1: &ConvParams, p2: &ConvParams) -> Result<Tensor, ShapeError> {
    if p1.stride != 1 || p2.stride != 1 || p2.out_channels() != input.channels() {
        return Err(ShapeError::Tensor("residual block must preserve the input shape"));
    }
    let mut hidden = conv2d(input, p1)?;
    relu_in_place(&mut hidden);
    let branch = conv2d(&hidden, p2)?;
    input.add(&branch)
}

/// Halves the resolution: `conv2(relu(conv1_s2(x))) + skip_s2(x)`, where the
/// skip path is a strided 1×1 convolution.
#[derive(Debug, Clone, PartialEq)]
pub struct DownsampledResidualBlock {
    pub conv1: ConvParams,
    pub conv2: ConvParams,
    pub skip: ConvParams,
}

impl DownsampledResidualBlock {
    pub fn forward(&self, input: &Tensor) -> Result<Tensor, ShapeError> {
        let mut hidden = conv2d(input, &self.conv1)?;
        relu_in_place(&mut hidden);
        let main = conv2d(&hidden, &self.conv2)?;
        let skip = conv2d(input, &self.skip)?;
        main.add(&skip)
    }
}

/// Doubles the resolution with nearest-neighbour upsampling, then applies a
/// residual branch at the new size.
#[derive(Debug, Clone, PartialEq)]
pub struct UpsampledResidualBlock {
    pub conv1: ConvParams,
    pub conv2: ConvParams,
}

impl UpsampledResidualBlock {
    pub fn forward(&self, input: &Tensor) -> Result<Tensor, ShapeError> {
        let up = upsample2x(input);
        let mut hidden = conv2d(&up, &self.conv1)?;
        relu_in_place(&mut hidden);
        let branch = conv2d(&hidden, &self.conv2)?;
        up.add(&branch)
    }
}

fn check_plane(estimate: &Tensor, y: &Image) -> Result<(), ShapeError> {
    if estimate.channels() != 1 || estimate.height() != y.height() || estimate.width() != y.width() {
        return Err(ShapeError::Tensor("estimate must be a single-channel plane the size of y"));
    }
    Ok(())
}

/// Clamps an estimate (in pixel units) into `[y - τ, y + τ]` per pixel.
/// NaN entries carry no information and are replaced by `y`.
pub fn truncated_activation(estimate: &Tensor, y: &Image, tau: u8) -> Result<Tensor, ShapeError> {
    check_plane(estimate, y)?;
    let tau = f32::from(tau);
    let data: Vec<f32> = estimate
        .data()
        .iter()
        .zip(y.pixels())
        .map(|(&v, &p)| {
            let p = f32::from(p);
            if v.is_nan() {
                p
            } else {
                v.clamp(p - tau, p + tau)
            }
        })
        .collect();
    Tensor::new(1, y.height(), y.width(), data)
}

/// Derivative of [`truncated_activation`]: 1 inside the closed band, 0 outside.
pub fn truncated_activation_grad(estimate: &Tensor, y: &Image, tau: u8) -> Result<Tensor, ShapeError> {
    check_plane(estimate, y)?;
    let tau = f32::from(tau);
    let data: Vec<f32> = estimate
        .data()
        .iter()
        .zip(y.pixels())
        .map(|(&v, &p)| {
            let p = f32::from(p);
            if v >= p - tau && v <= p + tau {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    Tensor::new(1, y.height(), y.width(), data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{relu, Padding};
    use alloc::vec;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_conv(rng: &mut ChaCha8Rng, out_c: usize, in_c: usize, k: usize, stride: usize, dilation: usize) -> ConvParams {
        ConvParams::new(
            out_c,
            in_c,
            k,
            k,
            (0..out_c * in_c * k * k).map(|_| rng.gen_range(-0.5..0.5)).collect(),
            (0..out_c).map(|_| rng.gen_range(-0.5..0.5)).collect(),
            stride,
            dilation,
            Padding::Same,
        )
        .unwrap()
    }

    fn plane(values: &[f32], w: usize) -> Tensor {
        Tensor::new(1, values.len() / w, w, values.to_vec()).unwrap()
    }

    #[test]
    fn zero_block_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let input = Tensor::new(4, 6, 6, (0..144).map(|_| rng.gen_range(-3.0..3.0)).collect()).unwrap();
        let zero = ConvParams::zeros(4, 4, 3, 1, 2);
        assert_eq!(dilated_residual_block(&input, &zero, &zero).unwrap(), input);
    }

    #[test]
    fn zero_input_constant_propagation() {
        // conv1 has zero weights and bias b1 >= 0, so relu passes b1 through;
        // conv2 then sums b1 · w2 over the taps that land inside the image.
        let b1 = 0.5f32;
        let p1 = ConvParams::new(1, 1, 3, 3, vec![0.0; 9], vec![b1], 1, 2, Padding::Same).unwrap();
        let p2 = ConvParams::new(1, 1, 3, 3, vec![1.0; 9], vec![0.25], 1, 2, Padding::Same).unwrap();
        let input = Tensor::zeros(1, 5, 5);
        let out = dilated_residual_block(&input, &p1, &p2).unwrap();
        // with dilation 2 on a 5x5 plane, taps at offsets {-2, 0, 2} per axis
        let inside = |c: usize| [c as isize - 2, c as isize, c as isize + 2].iter().filter(|&&v| (0..5).contains(&v)).count();
        for y in 0..5 {
            for x in 0..5 {
                let expected = 0.25 + b1 * (inside(y) * inside(x)) as f32;
                assert_eq!(out.get(0, y, x), expected);
            }
        }
        assert_eq!(out.get(0, 2, 2), 0.25 + 9.0 * b1);
        assert_eq!(out.get(0, 0, 0), 0.25 + 4.0 * b1);
    }

    #[test]
    fn block_matches_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let input = Tensor::new(3, 8, 8, (0..192).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let p1 = random_conv(&mut rng, 3, 3, 3, 1, 2);
        let p2 = random_conv(&mut rng, 3, 3, 3, 1, 2);
        let composed = input.add(&conv2d(&relu(&conv2d(&input, &p1).unwrap()), &p2).unwrap()).unwrap();
        let got = dilated_residual_block(&input, &p1, &p2).unwrap();
        for (a, b) in got.data().iter().zip(composed.data()) {
            assert!((a - b).abs() <= 1e-5);
        }
    }

    #[test]
    fn block_rejects_channel_change() {
        let input = Tensor::zeros(2, 4, 4);
        let p1 = ConvParams::zeros(3, 2, 3, 1, 2);
        let p2 = ConvParams::zeros(3, 3, 3, 1, 2);
        assert!(dilated_residual_block(&input, &p1, &p2).is_err());
    }

    #[test]
    fn down_and_up_blocks_shapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let down = DownsampledResidualBlock {
            conv1: random_conv(&mut rng, 4, 4, 3, 2, 1),
            conv2: random_conv(&mut rng, 4, 4, 3, 1, 1),
            skip: random_conv(&mut rng, 4, 4, 1, 2, 1),
        };
        let up = UpsampledResidualBlock { conv1: random_conv(&mut rng, 4, 4, 3, 1, 1), conv2: random_conv(&mut rng, 4, 4, 3, 1, 1) };
        let input = Tensor::filled(4, 10, 6, 0.3);
        let mid = down.forward(&input).unwrap();
        assert_eq!(mid.shape(), [4, 5, 3]);
        assert_eq!(up.forward(&mid).unwrap().shape(), [4, 10, 6]);
    }

    #[test]
    fn truncation_cases() {
        let y = Image::new(3, 1, vec![100, 100, 100]).unwrap();
        let est = plane(&[150.0, 100.0, 10.0], 3);
        assert_eq!(truncated_activation(&est, &y, 2).unwrap().data(), &[102.0, 100.0, 98.0]);
        let inside = plane(&[100.0, 101.5, 98.0], 3);
        assert_eq!(truncated_activation(&inside, &y, 2).unwrap(), inside);
        let nan = plane(&[f32::NAN, f32::INFINITY, f32::NEG_INFINITY], 3);
        assert_eq!(truncated_activation(&nan, &y, 2).unwrap().data(), &[100.0, 102.0, 98.0]);
    }

    #[test]
    fn truncation_of_y_is_identity() {
        let y = Image::from_fn(4, 3, |r, c| (r * 40 + c * 7) as u8);
        let est = Tensor::new(1, 3, 4, y.pixels().iter().map(|&p| f32::from(p)).collect()).unwrap();
        for tau in 0..=8 {
            assert_eq!(truncated_activation(&est, &y, tau).unwrap(), est);
            assert!(truncated_activation_grad(&est, &y, tau).unwrap().data().iter().all(|&g| g == 1.0));
        }
    }

    #[test]
    fn grad_zero_just_outside_band() {
        let y = Image::filled(2, 2, 50);
        for tau in 0..=8u8 {
            let est = Tensor::filled(1, 2, 2, 50.0 + f32::from(tau) + 1.0);
            assert!(truncated_activation_grad(&est, &y, tau).unwrap().data().iter().all(|&g| g == 0.0));
            let edge = Tensor::filled(1, 2, 2, 50.0 - f32::from(tau));
            assert!(truncated_activation_grad(&edge, &y, tau).unwrap().data().iter().all(|&g| g == 1.0));
        }
    }

    #[test]
    fn shape_mismatch() {
        let y = Image::filled(2, 2, 0);
        assert!(truncated_activation(&Tensor::zeros(1, 2, 3), &y, 1).is_err());
        assert!(truncated_activation_grad(&Tensor::zeros(2, 2, 2), &y, 1).is_err());
    }

    proptest! {
        #[test]
        fn truncation_laws(
            est in prop::collection::vec(-400.0f32..700.0, 12),
            ys in prop::collection::vec(any::<u8>(), 12),
            tau in 0u8..=8,
        ) {
            let y = Image::new(4, 3, ys).unwrap();
            let est = Tensor::new(1, 3, 4, est).unwrap();
            let t = truncated_activation(&est, &y, tau).unwrap();
            let g = truncated_activation_grad(&est, &y, tau).unwrap();
            for ((&v, &p), (&orig, &mask)) in t.data().iter().zip(y.pixels()).zip(est.data().iter().zip(g.data())) {
                prop_assert!((v - f32::from(p)).abs() <= f32::from(tau));
                prop_assert_eq!(mask == 1.0, v == orig);
            }
            prop_assert_eq!(truncated_activation(&t, &y, tau).unwrap(), t);
        }
    }
}
