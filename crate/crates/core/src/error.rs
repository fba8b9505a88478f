use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("moment infeasible: variance {variance} must be below mean*(1-mean) = {bound} for mean {mean}")]
    MomentInfeasible { mean: f64, variance: f64, bound: f64 },

    #[error("degenerate best arm: {0}")]
    DegenerateBestArm(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient samples: need at least 2 pulls, have {pulls}")]
    InsufficientSamples { pulls: u64 },

    #[error("no feasible arm in the instance")]
    NoFeasibleArm,

    #[error("missing sub-Gaussian proxy")]
    MissingSubgProxy,

    #[error("unbounded arm {arm} cannot be used with the bounded-reward algorithm")]
    UnboundedArm { arm: usize },

    #[error("scale undefined: h/delta = {ratio} must exceed 1")]
    ScaleUndefined { ratio: f64 },

    #[error("unknown catalog entry: {0}")]
    UnknownCatalogEntry(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
