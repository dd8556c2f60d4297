//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dataset is empty (rows={rows}, cols={cols})")]
    EmptyDataset { rows: usize, cols: usize },

    #[error("non-finite value {value} at row {row}, column {col}")]
    NonFiniteValue { row: usize, col: usize, value: f64 },

    #[error("row {row} has {got} values, expected {expected}")]
    RaggedRow { row: usize, got: usize, expected: usize },

    #[error("label count {labels} does not match row count {rows}")]
    LabelCountMismatch { labels: usize, rows: usize },

    #[error("label {value} at row {row} outside the representable range [-128, 128)")]
    LabelRange { row: usize, value: f64 },

    #[error("value {value} at row {row}, column {col} outside [0, 1]")]
    NotNormalized { row: usize, col: usize, value: f64 },

    #[error("precision {s} out of range 1..={max}")]
    PrecisionRange { s: u32, max: u32 },

    #[error("code {code:#x} does not fit in {s} bits")]
    CodeRange { code: u32, s: u32 },

    #[error("sample index {index} out of range (rows={rows})")]
    SampleRange { index: usize, rows: usize },

    #[error("batch size {got}: must be a multiple of 8 and a power of two")]
    BatchSize { got: u32 },

    #[error("learning-rate shift {got} out of range 0..=31")]
    LrShiftRange { got: u32 },

    #[error("epoch index must be >= 1")]
    EpochRange,

    #[error("model length {got} does not match store width {expected}")]
    DimensionMismatch { got: usize, expected: usize },

    #[error("model entry {index} overflows the 32-bit fixed-point range")]
    ModelOverflow { index: usize },

    #[error("bit-plane stream ended early: got {got} slices, need {need}")]
    StreamTooShort { got: usize, need: usize },

    #[error("bit-plane slice carries {got} planes, need {need}")]
    SliceDepth { got: usize, need: usize },

    #[error("store file: bad magic {got:02x?}")]
    BadMagic { got: [u8; 4] },

    #[error("store file: unsupported version {got} (expected {expected})")]
    VersionMismatch { got: u16, expected: u16 },

    #[error("store file: truncated ({context})")]
    Truncated { context: &'static str },

    #[error("store file: checksum mismatch (stored {stored:#010x}, computed {computed:#010x})")]
    ChecksumMismatch { stored: u32, computed: u32 },

    #[error("store file: inconsistent geometry ({0})")]
    BadGeometry(String),

    #[error("{source_name}:{line}: {msg}")]
    Parse {
        source_name: String,
        line: usize,
        msg: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
