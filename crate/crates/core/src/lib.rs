//! Near-lossless (l-infinity constrained) predictive image coding and a
//! soft-decoding inference runtime with a hard per-pixel error guarantee.
//!
//! The codec predicts every pixel from already reconstructed causal
//! neighbours ([`predictor`]), quantizes the residual with a uniform step of
//! `2τ+1` ([`quantizer`]) and Rice-codes the quantization indices under an
//! activity context ([`entropy`]). Every reconstructed pixel is within `τ` of
//! the original.
//!
//! The soft decoder ([`sdnet`]) runs a small dilated residual network over the
//! hard-decoded plane and confines its output to `[y-τ, y+τ]`, so the restored
//! image stays within `2τ` of the original no matter what weights are loaded.
//!
//! The crate is `no_std` and only needs `alloc`.
#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod codec;
pub mod entropy;
mod error;
pub mod image;
pub mod losses;
pub mod metrics;
pub mod nn;
pub mod predictor;
pub mod quantizer;
pub mod sdnet;
pub mod tensor;

pub use codec::{decode_image, encode_image, EncodeResult};
pub use entropy::Bitstream;
pub use error::{DecodeError, ShapeError, WeightsError};
pub use image::Image;
pub use metrics::{linf_error, psnr, MetricsReport, Psnr};
pub use quantizer::{CodecConfig, PredictorId};
pub use sdnet::{forward, soft_decode, Arch, ModelWeights};
pub use tensor::{ConvParams, Padding, Tensor};
