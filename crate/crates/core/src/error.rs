use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{func}: argument out of domain ({detail})")]
    Domain { func: &'static str, detail: String },

    #[error("{func}: no convergence after {iterations} iterations")]
    NonConvergence { func: &'static str, iterations: usize },

    #[error("{func}: degenerate parameters ({detail})")]
    Degenerate { func: &'static str, detail: String },

    #[error("cascade order {0} outside the supported range 1..=8")]
    OrderRange(u32),

    #[error("rank {rank} outside 1..={len}")]
    Rank { rank: usize, len: usize },

    #[error("matrix of size {0} exceeds the permanent size limit of 12")]
    SizeLimit(usize),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("configuration is not i.i.d.: {0}")]
    NotIid(String),

    #[error("quadrature missed its tolerance (integral {integral:e}, error estimate {error_estimate:e})")]
    Quadrature { integral: f64, error_estimate: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            func,
            detail: detail.into(),
        }
    }

    /// True for failures of an iterative numerical method, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. } | Error::Quadrature { .. }
        )
    }
}
