use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Errors raised by the numerical core.
///
/// Variants that concern one video or one filter carry enough context to name
/// it in a report.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument violated an operation's precondition.
    InvalidInput(String),
    EmptyInput(&'static str),
    DimensionMismatch {
        expected: usize,
        found: usize,
    },
    NonFinite {
        row: usize,
        col: usize,
    },
    ZeroNorm {
        id: String,
    },
    DegenerateFeature {
        id: String,
    },
    EmptyMelFilter {
        index: usize,
    },
    ClipTooShort {
        samples: usize,
        frame_size: usize,
    },
    SequenceTooShort {
        len: usize,
        window: usize,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::EmptyInput(what) => write!(f, "empty input: {what}"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::NonFinite { row, col } => {
                write!(f, "non-finite value at row {row}, column {col}")
            }
            Error::ZeroNorm { id } => write!(f, "feature row for `{id}` has zero norm"),
            Error::DegenerateFeature { id } => {
                write!(f, "degenerate (all-zero) feature vector for `{id}`")
            }
            Error::EmptyMelFilter { index } => write!(
                f,
                "mel filter {index} covers no FFT bin; lower n_mels or raise frame_size"
            ),
            Error::ClipTooShort {
                samples,
                frame_size,
            } => write!(
                f,
                "clip has {samples} samples, fewer than one frame of {frame_size}"
            ),
            Error::SequenceTooShort { len, window } => {
                write!(
                    f,
                    "sequence of length {len} is shorter than window {window}"
                )
            }
        }
    }
}

impl core::error::Error for Error {}
