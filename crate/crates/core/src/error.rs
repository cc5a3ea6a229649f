use thiserror::Error;

/// Errors raised by the synthesis and evaluation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input violated a documented precondition.
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("target unreachable: strategy never reaches {0}")]
    Unreachable(f64),

    #[error("partial strategy is not extendable")]
    NotExtendable,

    #[error("robustness requirement {0} is below {1}")]
    RobustnessTooSmall(f64, f64),

    #[error("no feasible configuration")]
    NoFeasibleConfiguration,

    #[error("infeasible update: no contract count admits a feasible schedule")]
    InfeasibleUpdate,

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// True for errors caused by bad inputs rather than numerical trouble.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Numerical(_) | Error::NoFeasibleConfiguration)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
