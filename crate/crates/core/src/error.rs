use thiserror::Error;

/// Errors raised by the sampling toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("density has no positive value")]
    AllZeroDensity,
    #[error("density value at index {0} is not finite")]
    NonFiniteValue(usize),
    #[error("density value at index {0} is negative")]
    NegativeValue(usize),
    #[error("index {index} out of range for {len} cells")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("decay must be positive, got {0}")]
    InvalidDecay(f64),
    #[error("plateau radius must lie in [0, 1), got {0}")]
    InvalidPlateauRadius(f64),
    #[error("dimension must be at least 2, got {0}")]
    InvalidDimension(usize),
    #[error("invalid resolution {0}")]
    InvalidResolution(usize),
    #[error("expected {expected} values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("coordinate {value} of point {point} lies outside [0, 1]")]
    CoordinateOutOfRange { point: usize, value: f64 },
    #[error("order is not a permutation of 0..{0}")]
    InvalidPermutation(usize),
    #[error("exact solver accepts at most {max} points, got {got}")]
    TooManyPointsForExact { max: usize, got: usize },
    #[error("path has zero length")]
    DegeneratePath,
    #[error("step must be positive, got {0}")]
    InvalidStep(f64),
    #[error("partition resolutions differ: {0} vs {1}")]
    ResolutionMismatch(usize, usize),
    #[error("target sample count must be at least 1")]
    UnreachableTarget,
    #[error("image side {0} must be a power of two and at least 8")]
    InvalidSide(usize),
    #[error("image sides differ: {0} vs {1}")]
    SideMismatch(usize, usize),
    #[error("reference image is zero")]
    ZeroReference,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
