use thiserror::Error;

/// Errors raised by the inference routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("empty batch: no set draws to estimate from")]
    EmptyBatch,

    #[error("degenerate point estimate: mean lower bound {lo} exceeds mean upper bound {hi}")]
    DegenerateEstimate { lo: f64, hi: f64 },

    #[error(
        "rejection budget of {attempts} exhausted sampling N({gamma0}, tau0^2) into [{lo}, {hi}]"
    )]
    RejectionBudget {
        lo: f64,
        hi: f64,
        gamma0: f64,
        attempts: u64,
    },

    #[error("scenario {0} has no data")]
    NoData(&'static str),

    #[error("malformed dataset: {0}")]
    Dataset(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
