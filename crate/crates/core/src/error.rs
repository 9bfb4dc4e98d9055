use thiserror::Error;

/// Errors raised by the convex-analysis toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("indeterminate extended-real sum (+inf) + (-inf)")]
    IndeterminateSum,

    #[error("indeterminate extended-real product 0 * inf")]
    IndeterminateProduct,

    #[error("no closed-form conjugate for {0}")]
    NoClosedForm(String),

    #[error("function is +inf on the whole grid")]
    AllInfinite,

    #[error("rank-deficient basis: rank {rank} < {columns} columns")]
    RankDeficientBasis { rank: usize, columns: usize },

    #[error("no solution after {iterations} iterations (residual {residual:e})")]
    NoSolution { iterations: usize, residual: f64 },

    #[error("hypothesis failed: {0}")]
    HypothesisFailed(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("csv: {0}")]
    Csv(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
