use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("malformed PNM header: {0}")]
    PnmHeader(String),
    #[error("truncated PNM payload: expected {expected} bytes, found {found}")]
    PnmTruncated { expected: usize, found: usize },
    #[error("maxval {0} is not of the form 2^N - 1 with 8 <= N <= 16")]
    UnsupportedMaxval(u32),
    #[error("sample exceeds maxval: {sample} > {maxval}")]
    SampleExceedsMaxval { sample: u32, maxval: u32 },

    #[error("invalid image: {0}")]
    InvalidImage(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("image has zero area")]
    ZeroArea,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("inconsistent lifting lengths: low {low}, high {high}")]
    LiftingLengths { low: usize, high: usize },
    #[error("empty input line")]
    EmptyLine,
    #[error("band layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("truncated bitstream")]
    TruncatedBitstream,
    #[error("corrupt header: {0}")]
    CorruptHeader(String),
    #[error("corrupt payload: {0}")]
    CorruptPayload(String),

    #[error("residual range violation: {0}")]
    ResidualRange(String),
    #[error("residual plane is already shifted")]
    AlreadyShifted,
    #[error("residual plane is not shifted")]
    NotShifted,

    #[error("bad container magic")]
    BadMagic,
    #[error("container length mismatch: {0}")]
    LengthMismatch(String),
    #[error(
        "container header checksum mismatch (stored {stored:#010x}, computed {computed:#010x})"
    )]
    ChecksumMismatch { stored: u32, computed: u32 },
    #[error("unsupported container version {0}")]
    UnsupportedVersion(u8),
    #[error("inconsistent container metadata: {0}")]
    InconsistentMeta(String),
    #[error("no base layer")]
    MissingBaseLayer,
}
