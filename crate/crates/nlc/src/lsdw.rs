//! `.lsdw` weight files.
//!
//! ```text
//! "LSDW" | version u8 = 1 | num_blocks u16 | base_channels u16 | dilation u16
//! | tensor_count u32
//! | per tensor: name_len u8, name (ASCII), rank u8, dims u32 × rank, values f32 × Π dims
//! | CRC-32 of every value byte, in order
//! ```
//!
//! All multi-byte fields are little-endian.

use nlc_core::sdnet::NamedTensor;
use nlc_core::{Arch, ModelWeights, WeightsError};
use thiserror::Error;

pub const MAGIC: [u8; 4] = *b"LSDW";
pub const VERSION: u8 = 1;

#[derive(Debug, Error, PartialEq)]
pub enum LsdwError {
    #[error("bad magic, not an LSDW weight file")]
    BadMagic,
    #[error("unsupported weight file version {0}")]
    UnsupportedVersion(u8),
    #[error("weight file truncated at byte {0}")]
    Truncated(usize),
    #[error("tensor name is not ASCII")]
    BadName,
    #[error("{0} unexpected bytes after the checksum")]
    TrailingBytes(usize),
    #[error("checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    Checksum { stored: u32, computed: u32 },
    #[error("weights do not match the declared architecture: {0}")]
    Inconsistent(#[from] WeightsError),
}

pub fn save_weights(m: &ModelWeights) -> Vec<u8> {
    let arch = m.arch();
    let mut out = Vec::with_capacity(32 + 4 * m.parameter_count());
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    for v in [arch.num_blocks, arch.base_channels, arch.dilation] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&(m.tensors().len() as u32).to_le_bytes());
    for t in m.tensors() {
        out.push(t.name.len() as u8);
        out.extend_from_slice(t.name.as_bytes());
        out.push(t.shape.len() as u8);
        for &d in &t.shape {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for v in &t.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out.extend_from_slice(&m.checksum().to_le_bytes());
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], LsdwError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or(LsdwError::Truncated(self.pos))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, LsdwError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, LsdwError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, LsdwError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

pub fn load_weights(bytes: &[u8]) -> Result<ModelWeights, LsdwError> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4).map_err(|_| LsdwError::BadMagic)? != MAGIC {
        return Err(LsdwError::BadMagic);
    }
    let version = r.u8()?;
    if version != VERSION {
        return Err(LsdwError::UnsupportedVersion(version));
    }
    let arch = Arch { num_blocks: r.u16()?, base_channels: r.u16()?, dilation: r.u16()? };
    let count = r.u32()? as usize;

    let mut crc = crc32fast::Hasher::new();
    // each tensor needs at least two header bytes, which bounds the allocation
    let mut tensors = Vec::with_capacity(count.min(bytes.len() / 2));
    for _ in 0..count {
        let name_len = usize::from(r.u8()?);
        let name = std::str::from_utf8(r.take(name_len)?)
            .ok()
            .filter(|s| s.is_ascii())
            .ok_or(LsdwError::BadName)?
            .to_owned();
        let rank = usize::from(r.u8()?);
        let shape = (0..rank).map(|_| r.u32().map(|d| d as usize)).collect::<Result<Vec<_>, _>>()?;
        let n = shape
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .and_then(|n| n.checked_mul(4))
            .ok_or(LsdwError::Truncated(r.pos))?;
        let raw = r.take(n)?;
        crc.update(raw);
        let values = raw.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
        tensors.push(NamedTensor { name, shape, values });
    }
    let stored = r.u32()?;
    let computed = crc.finalize();
    if stored != computed {
        return Err(LsdwError::Checksum { stored, computed });
    }
    if r.pos != bytes.len() {
        return Err(LsdwError::TrailingBytes(bytes.len() - r.pos));
    }
    Ok(ModelWeights::new(arch, tensors)?)
}
