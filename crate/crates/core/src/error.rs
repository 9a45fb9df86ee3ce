use alloc::string::String;

use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("truncated buffer: {len} bytes is not a multiple of the {record}-byte record")]
    Truncated { len: usize, record: usize },

    #[error("non-finite value at point {index}")]
    NonFinite { index: usize },

    #[error("point {index}: {field} = {value} is out of range")]
    OutOfRange {
        index: usize,
        field: &'static str,
        value: f64,
    },

    #[error("unknown class id {id} at index {index}")]
    UnknownClass { index: usize, id: u32 },

    #[error("malformed label word {raw:#010x} at index {index}")]
    MalformedLabel { index: usize, raw: u32 },

    #[error("length mismatch: expected {expected} entries, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("prediction header declares {n_points}x{n_classes} values but the payload holds {payload} bytes")]
    HeaderMismatch {
        n_points: usize,
        n_classes: usize,
        payload: usize,
    },

    #[error("expected {expected} classes, found {found}")]
    ClassCount { expected: usize, found: usize },

    #[error("prediction row {row} sums to {sum}")]
    RowSum { row: usize, sum: f64 },

    #[error("prediction row {row} holds probability {value} outside [0, 1]")]
    ProbabilityRange { row: usize, value: f64 },

    #[error("not a probability vector (sum {sum})")]
    InvalidSimplex { sum: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter {
        name: &'static str,
        reason: &'static str,
    },

    #[error("need more than {k} points for {k}-NN statistics, got {n}")]
    TooFewPoints { n: usize, k: usize },

    #[error("prediction matrix for scan `{0}` is empty")]
    EmptyPredictions(String),

    #[error("duplicate scan id `{0}`")]
    DuplicateScanId(String),

    #[error("invalid calibration: {0}")]
    InvalidCalibration(&'static str),

    #[error("label image is {found_w}x{found_h} but the calibration expects {expected_w}x{expected_h}")]
    DimensionMismatch {
        expected_w: u32,
        expected_h: u32,
        found_w: u32,
        found_h: u32,
    },

    #[error("malformed PGM image: {0}")]
    Pgm(&'static str),

    #[error("point index {index} out of range for {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("no class is present in the ground truth")]
    NoClassPresent,

    #[error("degenerate scene configuration: {0}")]
    DegenerateConfig(&'static str),
}
