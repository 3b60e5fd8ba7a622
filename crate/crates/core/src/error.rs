use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("block {block} contains no observation")]
    EmptyBlock { block: usize },

    #[error("estimation failed: {0}")]
    EstimationFailure(String),

    /// The estimator needs observations above the materialized band.
    /// `required` is the band height (above the boundary) that would suffice.
    #[error("sampled band too low: need height {required}, have {available}")]
    BandExceeded { required: f64, available: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("critical value undefined at grid index {m}, design index {i}: 2x*sqrt(h)*|w| >= 1")]
    CriticalValueDomain { m: usize, i: usize },

    #[error("class violation: {0}")]
    ClassViolation(String),

    #[error("degenerate confidence interval: no on-graph observations")]
    DegenerateInterval,

    #[error("unknown identifier `{0}`")]
    UnknownId(String),

    #[error("{failures} of {total} replicates failed (limit 1%)")]
    TooManyFailures { failures: usize, total: usize },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }

    /// True for errors that mean the configuration was wrong rather than the
    /// data being unlucky.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::CriticalValueDomain { .. }
                | Error::ClassViolation(_)
                | Error::UnknownId(_)
        )
    }
}
