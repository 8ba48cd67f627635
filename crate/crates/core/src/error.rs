use thiserror::Error;

use crate::linalg::LinalgError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Linalg(#[from] LinalgError),

    #[error("dimension d = {d} outside supported range {min}..={max}")]
    Dimension { d: usize, min: usize, max: usize },

    #[error("index ({k}, {l}) out of range for d = {d}")]
    Index { k: usize, l: usize, d: usize },

    #[error("intermediate state undefined: the two inputs cancel")]
    Degenerate,

    #[error("exhaustive enumeration at d = {d} would scan {strategies} strategies; use analytic mode (analytic_max)")]
    TooLargeForEnumeration { d: usize, strategies: u128 },

    #[error("invalid argument: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
