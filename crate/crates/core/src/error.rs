use thiserror::Error;

/// Errors raised by the fitting, analysis and certification routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GamError {
    #[error("dataset has no samples")]
    EmptyDataset,

    #[error("dataset has no features")]
    NoFeatures,

    #[error("non-finite feature value at row {row}, column {col}")]
    NonFiniteFeature { row: usize, col: usize },

    #[error("non-finite target at row {row}")]
    NonFiniteTarget { row: usize },

    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("knots must be strictly increasing and finite (violated at index {index})")]
    InvalidKnots { index: usize },

    #[error("positions must be sorted ascending (violated at index {index})")]
    Unsorted { index: usize },

    #[error("tied positions {first} and {second} carry different values")]
    TieConflict { first: usize, second: usize },

    #[error("label {label} at row {row} is not valid for {loss} loss (expected -1 or +1)")]
    InvalidLabel {
        label: f64,
        row: usize,
        loss: &'static str,
    },

    #[error("{0}")]
    UnsupportedLoss(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{quantity} of {loss} loss is unbounded; declare a prediction and target range")]
    UnboundedLoss {
        quantity: &'static str,
        loss: &'static str,
    },

    #[error("bound proven for p >= {min} only, got p = {p}")]
    FeatureCountTooSmall { p: usize, min: usize },

    #[error("triangle basis has {basis} functions (p = {p}, m = {m}), above the cap of {cap}")]
    OracleTooLarge {
        basis: usize,
        p: usize,
        m: usize,
        cap: usize,
    },
}

pub type Result<T> = std::result::Result<T, GamError>;
