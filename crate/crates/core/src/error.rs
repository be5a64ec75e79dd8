use alloc::string::String;

use thiserror::Error;

/// Two operands whose shapes are required to agree did not.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShapeError {
    #[error("dimension mismatch: {left_w}x{left_h} vs {right_w}x{right_h}")]
    Dimensions {
        left_w: usize,
        left_h: usize,
        right_w: usize,
        right_h: usize,
    },
    #[error("pixel buffer holds {actual} values, expected {expected}")]
    BufferLength { expected: usize, actual: usize },
    #[error("tensor shape mismatch: {0}")]
    Tensor(&'static str),
    #[error("tau {0} outside the supported range 0..=8")]
    Tau(u8),
    #[error("pixel ({row}, {col}) lies outside a {width}x{height} image")]
    OutOfRange {
        row: usize,
        col: usize,
        width: usize,
        height: usize,
    },
}

/// Failure while parsing or decoding a `.nlc` container.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("stream shorter than the {0}-byte header")]
    TruncatedHeader(usize),
    #[error("bad magic, not an NLC stream")]
    BadMagic,
    #[error("unsupported container version {0}")]
    UnsupportedVersion(u8),
    #[error("tau {0} outside the supported range 0..=8")]
    InvalidTau(u8),
    #[error("unknown predictor id {0}")]
    UnknownPredictor(u8),
    #[error("checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    Checksum { stored: u32, computed: u32 },
    #[error("payload ended after {decoded} of {expected} symbols")]
    TruncatedPayload { decoded: usize, expected: usize },
    #[error("{0} unexpected bits after the last symbol")]
    TrailingData(usize),
    #[error("nonzero padding bits")]
    BadPadding,
    #[error("image of {0} pixels cannot be coded in the available payload")]
    SymbolCount(usize),
}

/// A weight set that does not fit the architecture it claims.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WeightsError {
    #[error("expected {expected} tensors for this architecture, found {actual}")]
    TensorCount { expected: usize, actual: usize },
    #[error("tensor #{index}: expected `{expected}`, found `{actual}`")]
    Name {
        index: usize,
        expected: String,
        actual: String,
    },
    #[error("tensor `{name}` has the wrong shape")]
    Shape { name: String },
    #[error("tensor `{name}` holds non-finite values")]
    NonFinite { name: String },
    #[error("invalid architecture: {0}")]
    Arch(&'static str),
    #[error(transparent)]
    Input(#[from] ShapeError),
}
