use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library can report.
///
/// Variants split into two families: validation problems with the inputs
/// (bad matrices, unknown states, malformed documents) and numerical failures
/// raised while solving. [`Error::is_numerical`] tells them apart.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },

    #[error("a chain needs at least one state")]
    EmptyChain,

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("negative entry {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("entry {value} at ({row}, {col}) exceeds 1")]
    EntryAboveOne { row: usize, col: usize, value: f64 },

    #[error("column {column} is not stochastic (sum deviates from 1 by {deviation:e})")]
    NonStochastic { column: usize, deviation: f64 },

    #[error("expected {expected} labels, found {found}")]
    LabelCount { expected: usize, found: usize },

    #[error("duplicate state label {0:?}")]
    DuplicateLabel(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("composite chain would have {requested} states (limit {limit})")]
    TooManyStates { requested: usize, limit: usize },

    #[error("chain has no transient states")]
    NoTransientStates,

    #[error("unknown ergodic class {0}")]
    UnknownClass(usize),

    #[error("unknown state {0:?}")]
    UnknownState(String),

    #[error("state {0:?} is not absorbing")]
    NotAbsorbing(String),

    #[error("no distance given for transition {from} -> {to}")]
    MissingDistance { from: usize, to: usize },

    #[error("chain with {states} states is not a {players}-fold composite of a {base}-state game")]
    NotComposite {
        states: usize,
        base: usize,
        players: usize,
    },

    #[error(
        "mask weight at ({row}, {col}) is nonzero on an ergodic transition; the cumulative expectation may be infinite"
    )]
    ZeroConditionViolated { row: usize, col: usize },

    #[error("operands belong to different chains")]
    ChainMismatch,

    #[error("transient system is numerically singular (pivot {pivot:e} at {index})")]
    SingularSystem { index: usize, pivot: f64 },

    #[error("relative residual {residual:e} exceeds the acceptance threshold")]
    ResidualTooLarge { residual: f64 },

    #[error("stationary solve for ergodic class {class} failed (residual {residual:e})")]
    StationaryFailure { class: usize, residual: f64 },

    #[error("{truncated} of {paths} simulated paths hit the step cap")]
    ExcessiveTruncation { truncated: u64, paths: u64 },

    #[error("invalid board: {0}")]
    InvalidBoard(String),

    #[error("schema error at {location}: {message}")]
    Schema { location: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    /// True for failures that arise from floating-point computation rather
    /// than from malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularSystem { .. }
                | Error::ResidualTooLarge { .. }
                | Error::StationaryFailure { .. }
                | Error::ExcessiveTruncation { .. }
                | Error::Internal(_)
        )
    }

    pub(crate) fn schema(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            location: location.into(),
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
