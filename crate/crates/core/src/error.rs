use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A distribution, program or basis was constructed with bad parameters.
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// A probability argument outside the open unit interval.
    #[error("probability {0} is outside (0, 1)")]
    Domain(f64),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error(
        "quadrature did not converge after {subdivisions} subdivisions (estimate {estimate}, residual {residual:e})"
    )]
    NonConvergent {
        estimate: f64,
        residual: f64,
        subdivisions: usize,
    },

    #[error("transform `{0}` lacks an analytic inverse or derivative")]
    UnsupportedTransform(String),

    #[error("singularity: {0}")]
    Singularity(String),

    /// A non-finite value appeared while propagating samples or atoms.
    #[error("propagation error at {at}: {detail}")]
    Propagation { at: String, detail: String },

    #[error("response {index} is linearly dependent on the previous ones (relative norm {norm:e})")]
    DependentBasis { index: usize, norm: f64 },

    #[error("noise source depleted after {0} draws")]
    SourceDepleted(usize),

    #[error("checksum mismatch for {0}")]
    Checksum(PathBuf),

    #[error("format error: {0}")]
    Format(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn propagation(at: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Propagation {
            at: at.into(),
            detail: detail.into(),
        }
    }

    /// True for errors caused by user configuration rather than numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::Argument(_)
                | Error::Config(_)
                | Error::Format(_)
                | Error::UnsupportedTransform(_)
        )
    }
}
