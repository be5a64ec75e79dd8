//! Context-adaptive Rice coding of quantization indices and the `.nlc`
//! container.
//!
//! Container layout, all integers little-endian:
//!
//! | offset | size | field                       |
//! |--------|------|-----------------------------|
//! | 0      | 4    | magic `NLC1`                |
//! | 4      | 1    | version (1)                 |
//! | 5      | 4    | width                       |
//! | 9      | 4    | height                      |
//! | 13     | 1    | tau                         |
//! | 14     | 1    | predictor id                |
//! | 15     | n    | MSB-first codewords, zero padded to a byte |
//! | 15+n   | 4    | CRC-32 of bytes `0..15+n`   |

pub mod bits;
pub mod rice;

use alloc::vec::Vec;

use crate::error::{DecodeError, ShapeError};
use crate::predictor::CausalWindow;
use crate::quantizer::{PredictorId, MAX_TAU};
use bits::{BitReader, BitWriter};
use rice::{rice_decode, rice_encode, unzigzag, zigzag, RiceContext};

pub const MAGIC: [u8; 4] = *b"NLC1";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 15;
pub const CHECKSUM_LEN: usize = 4;
pub const NUM_CONTEXTS: usize = 4;

/// Activity bucket of a window: `dh + dv` in `[0,4]`, `[5,16]`, `[17,64]`, `65..`.
#[inline]
pub fn select_context(win: &CausalWindow) -> u8 {
    match win.activity() {
        ..=4 => 0,
        5..=16 => 1,
        17..=64 => 2,
        _ => 3,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Header {
    pub width: u32,
    pub height: u32,
    pub tau: u8,
    pub predictor: PredictorId,
}

impl Header {
    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    fn write(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&MAGIC);
        out.push(VERSION);
        out.extend_from_slice(&self.width.to_le_bytes());
        out.extend_from_slice(&self.height.to_le_bytes());
        out.push(self.tau);
        out.push(self.predictor as u8);
    }

    fn parse(bytes: &[u8]) -> Result<Self, DecodeError> {
        if bytes.len() < HEADER_LEN {
            return Err(DecodeError::TruncatedHeader(HEADER_LEN));
        }
        if bytes[..4] != MAGIC {
            return Err(DecodeError::BadMagic);
        }
        if bytes[4] != VERSION {
            return Err(DecodeError::UnsupportedVersion(bytes[4]));
        }
        let u32_at = |i: usize| u32::from_le_bytes([bytes[i], bytes[i + 1], bytes[i + 2], bytes[i + 3]]);
        let tau = bytes[13];
        if tau > MAX_TAU {
            return Err(DecodeError::InvalidTau(tau));
        }
        let predictor = PredictorId::from_byte(bytes[14]).ok_or(DecodeError::UnknownPredictor(bytes[14]))?;
        Ok(Self { width: u32_at(5), height: u32_at(9), tau, predictor })
    }
}

/// Header plus packed payload of one coded image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bitstream {
    pub header: Header,
    pub payload: Vec<u8>,
}

impl Bitstream {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.byte_len());
        self.header.write(&mut out);
        out.extend_from_slice(&self.payload);
        let crc = crc32fast::hash(&out);
        out.extend_from_slice(&crc.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, DecodeError> {
        let header = Header::parse(bytes)?;
        if bytes.len() < HEADER_LEN + CHECKSUM_LEN {
            return Err(DecodeError::TruncatedPayload { decoded: 0, expected: header.pixel_count() });
        }
        let (body, tail) = bytes.split_at(bytes.len() - CHECKSUM_LEN);
        let stored = u32::from_le_bytes([tail[0], tail[1], tail[2], tail[3]]);
        let computed = crc32fast::hash(body);
        if stored != computed {
            return Err(DecodeError::Checksum { stored, computed });
        }
        Ok(Self { header, payload: body[HEADER_LEN..].to_vec() })
    }

    /// Serialized size in bytes, including header and checksum.
    pub fn byte_len(&self) -> usize {
        HEADER_LEN + self.payload.len() + CHECKSUM_LEN
    }

    /// Bits per pixel of the serialized stream.
    pub fn bpp(&self) -> f64 {
        let pixels = self.header.pixel_count();
        if pixels == 0 {
            return 0.0;
        }
        (self.byte_len() * 8) as f64 / pixels as f64
    }
}

/// Streaming index coder. Each symbol is coded with the `k` its context held
/// before the symbol was seen.
#[derive(Debug, Default)]
pub struct SymbolEncoder {
    out: BitWriter,
    contexts: [RiceContext; NUM_CONTEXTS],
}

impl SymbolEncoder {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn encode(&mut self, index: i32, context: u8) {
        let ctx = &mut self.contexts[usize::from(context)];
        let u = zigzag(index);
        rice_encode(&mut self.out, u, ctx.k());
        ctx.update(u);
    }

    pub fn bit_len(&self) -> usize {
        self.out.bit_len()
    }

    pub fn finish(self) -> Vec<u8> {
        self.out.finish()
    }
}

#[derive(Debug)]
pub struct SymbolDecoder<'a> {
    input: BitReader<'a>,
    contexts: [RiceContext; NUM_CONTEXTS],
    expected: usize,
    decoded: usize,
}

impl<'a> SymbolDecoder<'a> {
    /// Fails early when the payload cannot hold `expected` symbols of at
    /// least one bit each.
    pub fn new(payload: &'a [u8], expected: usize) -> Result<Self, DecodeError> {
        if expected > payload.len().saturating_mul(8) {
            return Err(DecodeError::SymbolCount(expected));
        }
        Ok(Self {
            input: BitReader::new(payload),
            contexts: [RiceContext::default(); NUM_CONTEXTS],
            expected,
            decoded: 0,
        })
    }

    #[inline]
    pub fn decode(&mut self, context: u8) -> Result<i32, DecodeError> {
        let ctx = &mut self.contexts[usize::from(context)];
        let u = rice_decode(&mut self.input, ctx.k()).ok_or(DecodeError::TruncatedPayload {
            decoded: self.decoded,
            expected: self.expected,
        })?;
        ctx.update(u);
        self.decoded += 1;
        Ok(unzigzag(u))
    }

    /// Checks that only zero padding follows the last symbol.
    pub fn finish(mut self) -> Result<(), DecodeError> {
        let remaining = self.input.remaining();
        if remaining >= 8 {
            return Err(DecodeError::TrailingData(remaining));
        }
        while let Some(bit) = self.input.read_bit() {
            if bit {
                return Err(DecodeError::BadPadding);
            }
        }
        Ok(())
    }
}

/// Codes a full plane of indices given each symbol's context id.
pub fn encode_plane(indices: &[i32], contexts: &[u8], header: Header) -> Result<Bitstream, ShapeError> {
    let expected = header.pixel_count();
    for len in [indices.len(), contexts.len()] {
        if len != expected {
            return Err(ShapeError::BufferLength { expected, actual: len });
        }
    }
    let mut enc = SymbolEncoder::new();
    for (&m, &ctx) in indices.iter().zip(contexts) {
        enc.encode(m, ctx);
    }
    Ok(Bitstream { header, payload: enc.finish() })
}

pub fn decode_plane(stream: &Bitstream, contexts: &[u8]) -> Result<Vec<i32>, DecodeError> {
    let expected = stream.header.pixel_count();
    if contexts.len() != expected {
        return Err(DecodeError::SymbolCount(expected));
    }
    let mut dec = SymbolDecoder::new(&stream.payload, expected)?;
    let indices = contexts.iter().map(|&ctx| dec.decode(ctx)).collect::<Result<Vec<_>, _>>()?;
    dec.finish()?;
    Ok(indices)
}
