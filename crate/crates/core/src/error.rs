use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by the equilibrium engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("{op}: {detail}")]
    Domain { op: &'static str, detail: String },
    /// Model or market parameters fail an admissibility requirement.
    #[error("invalid parameters: {0}")]
    Params(String),
    /// A root or optimum search did not converge; carries bracket diagnostics.
    #[error("{op}: {detail}")]
    Solver { op: &'static str, detail: String },
    /// An oracle grid cannot cover the optima it must resolve.
    #[error("oracle grid: {0}")]
    GridCoverage(String),
}

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn solver(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Solver {
            op,
            detail: detail.into(),
        }
    }
}
