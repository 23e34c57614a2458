use alloc::string::String;

/// Failures reported by the numerical routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("grid with {nodes} nodes is too coarse for degree {degree}")]
    GridTooCoarse { degree: usize, nodes: usize },
    #[error("integral diverges: {0}")]
    Divergent(String),
    #[error("no convergence: {0}")]
    NonConvergence(String),
    #[error("budget exhausted: estimate {estimate} with stderr {stderr}")]
    BudgetExhausted { estimate: f64, stderr: f64 },
    #[error("constraint violated: {0}")]
    ConstraintViolation(String),
    #[error("annulus condition violated: {0}")]
    AnnulusViolation(String),
    #[error("asymmetry too large for the reduction: R = {r_big} > 1/2")]
    AlphaTooLarge { r_big: f64 },
    #[error("spectral truncation residual {residual} above tolerance {tol}")]
    Truncation { residual: f64, tol: f64 },
    #[error("tail bound e^((n-lambda)eps)*beta_K = {tail} exceeds the computed maximum {max}")]
    TailDomination { tail: f64, max: f64 },
    #[error("spectral gap beta_1 - beta_2 = {0} is not positive")]
    NonPositiveGap(f64),
}

impl Error {
    /// True for failures of an iteration or sampling budget rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonConvergence(_) | Error::BudgetExhausted { .. } | Error::Truncation { .. })
    }
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
