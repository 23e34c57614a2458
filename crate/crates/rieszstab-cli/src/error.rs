use std::fmt;
use std::io;

/// Exit status of a command that ran to completion.
pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable or malformed input files.
    Input(String),
    /// A quadrature, root finder or sampler did not converge.
    Numerical(String),
    /// The computation finished but a checked property does not hold.
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Verification(_) => EXIT_FAIL,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Verification(m) => write!(f, "verification failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<rieszstab::Error> for CliError {
    fn from(e: rieszstab::Error) -> Self {
        use rieszstab::Error as E;
        let msg = e.to_string();
        match e {
            E::NonConvergence(_) | E::BudgetExhausted { .. } | E::Truncation { .. } | E::TailDomination { .. } => {
                CliError::Numerical(msg)
            }
            E::ConstraintViolation(_) | E::AnnulusViolation(_) | E::NonPositiveGap(_) => CliError::Verification(msg),
            _ => CliError::Input(msg),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Input(format!("malformed JSON: {e}"))
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
