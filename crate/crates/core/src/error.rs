use alloc::string::String;
use core::fmt;

/// Errors raised by the tracking algorithms.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A box with non-positive or non-finite extent.
    InvalidBox { w: f64, h: f64 },
    /// A confidence outside `[0, 1]`.
    InvalidConfidence(f64),
    /// Frame numbers are 1-based.
    InvalidFrame(u32),
    /// A frame stack whose shape or samples are inconsistent.
    InvalidFrameStack(String),
    /// A parameter outside its documented range.
    InvalidParameter { name: &'static str, reason: String },
    /// Input data contains NaN or infinity.
    NonFinite,
    /// Two operands do not have compatible shapes.
    ShapeMismatch { expected: (usize, usize), found: (usize, usize) },
    /// Downsampling needs dimensions divisible by the pooling factor.
    NotDivisible { rows: usize, cols: usize, factor: usize },
    /// Trajectory samples must have strictly increasing frames.
    NonIncreasingFrames { previous: u32, next: u32 },
    /// Regression inputs must have strictly increasing times.
    NonIncreasingTimes,
    /// Regression needs at least two observations.
    TooFewObservations(usize),
    /// Regression query outside the observed time span.
    QueryOutOfRange(f64),
    /// A covariance that could not be factorized.
    NotPositiveDefinite(&'static str),
    /// A simulated target leaves the frame.
    PathLeavesFrame { target: usize, frame: usize },
    /// Random placement of static patches found no free spot.
    PlacementFailed(usize),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    /// `true` for failures of a numerical routine rather than of the input data.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NotPositiveDefinite(_))
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidBox { w, h } => write!(f, "invalid box extent {w}x{h}"),
            Error::InvalidConfidence(c) => write!(f, "confidence {c} outside [0, 1]"),
            Error::InvalidFrame(k) => write!(f, "invalid frame number {k} (frames are 1-based)"),
            Error::InvalidFrameStack(msg) => write!(f, "invalid frame stack: {msg}"),
            Error::InvalidParameter { name, reason } => write!(f, "invalid parameter `{name}`: {reason}"),
            Error::NonFinite => f.write_str("input contains non-finite values"),
            Error::ShapeMismatch { expected, found } => write!(
                f,
                "shape mismatch: expected {}x{}, found {}x{}",
                expected.0, expected.1, found.0, found.1
            ),
            Error::NotDivisible { rows, cols, factor } => {
                write!(f, "{rows}x{cols} map is not divisible by {factor}")
            }
            Error::NonIncreasingFrames { previous, next } => {
                write!(f, "frame {next} does not follow frame {previous}")
            }
            Error::NonIncreasingTimes => f.write_str("observation times must be strictly increasing"),
            Error::TooFewObservations(n) => write!(f, "need at least 2 observations, got {n}"),
            Error::QueryOutOfRange(t) => write!(f, "query time {t} outside the observed span"),
            Error::NotPositiveDefinite(what) => write!(f, "{what} is not positive definite"),
            Error::PathLeavesFrame { target, frame } => {
                write!(f, "target {target} leaves the frame at frame index {frame}")
            }
            Error::PlacementFailed(n) => write!(f, "could not place {n} static patches without overlap"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
