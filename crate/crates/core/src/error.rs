use thiserror::Error;

use crate::pregroup::Reduction;

/// Errors produced across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("matrix is not positive semi-definite (min eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("degenerate operator: {0}")]
    Degenerate(String),

    #[error("vector has negative entry {value} at index {index}")]
    NegativeEntry { index: usize, value: f64 },

    #[error("vector is not L1-normalized (sum {0})")]
    Unnormalized(f64),

    #[error("non-finite entry at index {0}")]
    NonFinite(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown grammatical category `{0}`")]
    UnknownCategory(String),

    #[error("unknown basic type `{0}`")]
    UnknownBasicType(String),

    #[error("ungrammatical string: no reduction to the target type (best partial: {best_partial})")]
    Ungrammatical { best_partial: Reduction },

    #[error("inconsistent contraction plan: {0}")]
    InconsistentPlan(String),

    #[error("degenerate phrase: {0}")]
    DegeneratePhrase(String),

    #[error("missing word `{0}`")]
    MissingWord(String),

    #[error("no argument data for verb `{0}`")]
    MissingVerbData(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("header mismatch: {0}")]
    HeaderMismatch(String),

    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(String),

    #[error("gold labels contain a single class")]
    SingleClass,

    #[error("empty input: {0}")]
    Empty(String),

    #[error("experiment failed: {0}")]
    Experiment(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}
