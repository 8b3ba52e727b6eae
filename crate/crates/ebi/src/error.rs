//! Crate-wide error type.
//!
//! Every fallible operation returns [`Result`]. Variants mirror the distinct
//! failure classes of the API contracts: schedule infeasibility, dimension and
//! kind mismatches, domain violations of bound hypotheses, undefined
//! u-statistics, and I/O or parse failures on the serialization surfaces.

/// Error type shared by all modules.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// No full block pair fits the requested `(n, τ)`.
    #[error("infeasible schedule: {0}")]
    InfeasibleSchedule(String),

    /// Mismatched lengths or matrix shapes.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A parameter lies outside the range an operation is defined on
    /// (e.g. a tabulated mixing model queried below its smallest lag).
    #[error("out of range: {0}")]
    OutOfRange(String),

    /// A hypothesis of the evaluated formula is violated
    /// (e.g. `δ ≥ 2/e` for bounds that require `δ < 2/e`).
    #[error("domain error: {0}")]
    Domain(String),

    /// A Gram matrix of the wrong kind was supplied to a transform.
    #[error("gram kind mismatch: {0}")]
    Kind(String),

    /// Invalid input data (non-finite values, bad labels, empty input, …).
    #[error("invalid input: {0}")]
    Input(String),

    /// A u-statistic that needs `m ≥ 2` blocks was requested with `m = 1`.
    #[error("u-statistic undefined: {0}")]
    UndefinedUStatistic(String),

    /// The operation is not supported for the given configuration
    /// (e.g. the analytic trace term for a non-Gaussian kernel).
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Malformed serialized data.
    #[error("parse error: {0}")]
    Parse(String),

    /// Underlying I/O failure.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
