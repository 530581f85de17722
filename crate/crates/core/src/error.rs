use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Errors raised by the core algorithms.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    VertexOutOfRange {
        vertex: usize,
        n: usize,
    },
    TypeOutOfRange {
        vertex: usize,
        ty: usize,
        k: usize,
    },
    SelfLoopDisallowed {
        vertex: usize,
    },
    LengthMismatch {
        expected: usize,
        found: usize,
    },
    InvalidConfig(&'static str),
    /// Every vertex is pinned, so there is no chain to run.
    NothingToSample,
    /// Refused to enumerate a state space larger than `limit`.
    EnumerationTooLarge {
        size: u128,
        limit: u128,
    },
    /// A vertex never had its conditional distribution recorded.
    Unvisited {
        vertex: usize,
    },
    /// A vertex never agreed across any sampled pair of chains.
    NoAgreement {
        vertex: usize,
    },
    EmptyAccumulator,
    ShapeMismatch,
    ThresholdMismatch,
    ZeroVariance,
    Undefined(&'static str),
    Oracle(String),
    /// Failure reported by caller-supplied code such as a stage hook.
    External(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::VertexOutOfRange { vertex, n } => {
                write!(f, "vertex {vertex} out of range for graph with {n} vertices")
            }
            Error::TypeOutOfRange { vertex, ty, k } => {
                write!(f, "vertex {vertex} has type {ty}, but only {k} types exist")
            }
            Error::SelfLoopDisallowed { vertex } => {
                write!(f, "self-loop on vertex {vertex} but self-loops are disallowed")
            }
            Error::LengthMismatch { expected, found } => {
                write!(f, "expected length {expected}, found {found}")
            }
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::NothingToSample => write!(f, "all vertices are pinned; nothing to sample"),
            Error::EnumerationTooLarge { size, limit } => {
                write!(f, "enumeration of {size} items exceeds the limit of {limit}")
            }
            Error::Unvisited { vertex } => {
                write!(f, "vertex {vertex} was never resampled after burn-in; increase the number of steps")
            }
            Error::NoAgreement { vertex } => {
                write!(f, "vertex {vertex} never agreed across sampled chain pairs; increase the number of steps")
            }
            Error::EmptyAccumulator => write!(f, "accumulator holds no post-burn-in samples"),
            Error::ShapeMismatch => write!(f, "accumulators have different shapes"),
            Error::ThresholdMismatch => write!(f, "runs use different thresholds or vertex sets"),
            Error::ZeroVariance => write!(f, "correlation undefined for zero-variance input"),
            Error::Undefined(msg) => write!(f, "undefined: {msg}"),
            Error::Oracle(msg) => write!(f, "oracle failure: {msg}"),
            Error::External(msg) => f.write_str(msg),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
