//! Error type shared by all modules of the crate.

use thiserror::Error;

/// Errors produced by geometry, enumeration, and zeta machinery.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("degenerate shape: {0}")]
    DegenerateShape(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("word letter {letter} out of range 1..={alphabet}")]
    InvalidWord { letter: usize, alphabet: usize },

    #[error("generator index {index} out of range ({count} generators)")]
    GeneratorIndex { index: usize, count: usize },

    #[error("enumerating {count} words exceeds the budget of {budget}")]
    BudgetExceeded { count: u128, budget: u128 },

    #[error("sum of ratios^d = {sum} >= 1, total tile volume diverges")]
    DivergentSeries { sum: f64 },

    #[error("evaluation point is within {dist:.3e} of a pole")]
    NearPole { dist: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("argument principle counts {contour} roots in the window, search found {found}")]
    IncompleteRootSet { contour: usize, found: usize },

    #[error("pole at {re}{im:+}i is not simple")]
    NotSimplePole { re: f64, im: f64 },

    #[error("pole separation {separation:.3e} is too small for a contour residue")]
    PoleCluster { separation: f64 },

    #[error("generator is not monophase; tube polynomial breaks near eps = {breakpoint}")]
    NotMonophase { breakpoint: f64 },

    #[error("no closed coefficient expansion: {0}")]
    NoClosedExpansion(String),

    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
