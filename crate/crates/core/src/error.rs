use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Failure modes of the analysis and synthesis routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A precondition on an argument was violated.
    InvalidArgument(String),
    /// The requested control problem has no solution; `direction` is the
    /// adjoint direction that obstructs it.
    Infeasible { reason: String, direction: Vec<f64> },
    /// No stabilizing construction exists for the given parameters.
    NotStabilizable(String),
    /// A weighted Gramian is numerically singular along `direction`.
    Uncontrollable { direction: Vec<f64> },
    /// A dense linear-algebra kernel failed to converge or hit a singular solve.
    Numerical(String),
}

impl Error {
    /// Machine-readable category used by the command-line front end.
    pub fn category(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::Infeasible { .. } | Error::Uncontrollable { .. } => "infeasible",
            Error::NotStabilizable(_) => "not-stabilizable",
            Error::Numerical(_) => "numerical",
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(m) => write!(f, "invalid argument: {m}"),
            Error::Infeasible { reason, direction } => {
                write!(f, "infeasible: {reason} (obstructing direction {direction:?})")
            }
            Error::NotStabilizable(m) => write!(f, "not stabilizable: {m}"),
            Error::Uncontrollable { direction } => write!(
                f,
                "weighted Gramian is singular; uncontrollable direction {direction:?}"
            ),
            Error::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
