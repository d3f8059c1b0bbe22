use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("unsupported wav: {0}")]
    UnsupportedWav(String),

    #[error("wav error: {0}")]
    Wav(#[from] hound::Error),

    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: [u8; 4], found: [u8; 4] },

    #[error("unsupported {what} version {found} (expected {expected})")]
    VersionMismatch { what: &'static str, expected: u32, found: u32 },

    #[error("tensor `{name}`: {reason}")]
    Tensor { name: String, reason: String },

    #[error("missing or truncated tensor `{0}`")]
    MissingTensor(String),

    #[error("checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    Checksum { stored: u32, computed: u32 },

    #[error("invalid dimensions: {0}")]
    InvalidDims(String),

    #[error("field `{field}` out of range: {value} (max {max})")]
    FieldRange { field: &'static str, value: u32, max: u32 },

    #[error("bitstream length {len} is not a multiple of 8; partial packet at byte offset {offset}")]
    TruncatedBitstream { len: usize, offset: usize },

    #[error("feature file length {len} is not a multiple of {frame_bytes} bytes; partial frame at byte offset {offset}")]
    TruncatedFeatures { len: usize, frame_bytes: usize, offset: usize },

    #[error("insufficient training data: {have} vectors, need at least {need}")]
    InsufficientData { have: usize, need: usize },

    #[error("configuration error: {0}")]
    Config(String),
}
