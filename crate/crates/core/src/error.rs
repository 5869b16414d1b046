use thiserror::Error;

use crate::atoms::AtomSet;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("carrier mismatch: expected {expected}, found {found}")]
    CarrierMismatch { expected: String, found: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid sequence: {0}")]
    InvalidSequence(String),

    #[error("invalid regulator: {0}")]
    InvalidRegulator(String),

    #[error("no column in row {row} descends below target {target}")]
    NoSuchColumn { row: usize, target: String },

    #[error("sets {first} and {second} are not disjoint")]
    NotDisjoint { first: AtomSet, second: AtomSet },

    #[error("chain is not decreasing at position {index}")]
    NotDecreasing { index: usize },

    #[error("chain has nonempty intersection {0}")]
    NonEmptyIntersection(AtomSet),

    #[error("chain is not null for the submeasure: final value {0}")]
    NotTauNull(String),

    #[error("set {set} is not contained in chain member {index}")]
    NotContained { set: AtomSet, index: usize },

    #[error("{what}: {n} exceeds the limit {max}")]
    TooLarge { what: &'static str, n: usize, max: usize },

    #[error("operation requires a totally ordered (scalar) carrier")]
    NotTotallyOrdered,

    #[error("invalid set function: {0}")]
    InvalidSetFunction(String),

    #[error("family has no declared limit")]
    MissingLimit,

    #[error("no block certifies level {level} within search width {width}")]
    NoBlockFound { level: usize, width: usize },

    #[error("no tail bound available: {0}")]
    NoTailBound(String),

    #[error("rejection budget of {budget} candidates exhausted")]
    RejectionBudgetExhausted { budget: usize },

    #[error("arithmetic overflow: {0}")]
    Overflow(&'static str),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("fixture error: {0}")]
    Fixture(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
