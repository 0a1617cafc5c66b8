use std::io;

use thiserror::Error;

/// Errors produced by the library.
///
/// Variants are grouped so that callers (the CLI in particular) can map them
/// onto coarse exit-code classes with [`Error::class`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("density of an empty node set is undefined")]
    EmptySubset,

    #[error("invalid subset pair: {0}")]
    InvalidSubset(String),

    #[error("unknown node id {0}")]
    UnknownNode(u64),

    #[error("graph has an empty part")]
    EmptyPart,

    #[error("random split left one side empty after {0} attempts")]
    DegenerateSplit(usize),

    #[error("instance too large for exhaustive enumeration: {size} > {limit}")]
    SizeGuard { size: usize, limit: usize },

    #[error("assignment length {got} does not match problem size {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid spin value {0}; spins must be -1 or +1")]
    InvalidSpin(i8),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("remote solver unreachable: {0}")]
    Network(String),

    #[error("malformed remote response: {0}")]
    MalformedResponse(String),

    #[error("remote sample {index} reports energy {reported} but evaluates to {computed}")]
    EnergyMismatch {
        index: usize,
        reported: f64,
        computed: f64,
    },

    #[error("remote solver returned no samples")]
    NoSamples,

    #[error("qubit count {requested} exceeds the simulator cap of {cap}")]
    QubitCap { requested: usize, cap: usize },

    #[error("marked-set size is zero and no iteration count was supplied")]
    NoMarkedItems,
}

/// Coarse error classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Invalid input data or a domain-level failure.
    Domain,
    /// Filesystem or transport failure.
    Io,
    /// A size guard or simulator cap was hit.
    Guard,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Io(_) | Error::Network(_) => ErrorClass::Io,
            Error::SizeGuard { .. } | Error::QubitCap { .. } => ErrorClass::Guard,
            _ => ErrorClass::Domain,
        }
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
