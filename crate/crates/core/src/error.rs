use alloc::boxed::Box;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    DimensionMismatch {
        expected: usize,
        found: usize,
    },
    /// A branch record violates a structural invariant. `index` is the
    /// position of the record in the input list.
    InvalidBranch {
        index: usize,
        reason: &'static str,
    },
    InvalidLoad {
        node: usize,
        reason: &'static str,
    },
    DuplicateBranch {
        from: usize,
        to: usize,
    },
    /// No in-service path connects `node` to the slack.
    Disconnected {
        node: usize,
    },
    UnknownTie {
        from: usize,
        to: usize,
    },
    /// Voltage magnitude below the short-circuit floor at a non-slack node.
    ShortCircuit {
        node: usize,
        magnitude: f64,
    },
    /// `|v|^alpha` with `alpha < 2` evaluated at a zero voltage.
    ZeroVoltage {
        node: usize,
    },
    SingularMatrix {
        pivot: usize,
    },
    /// The solved step does not reproduce the right-hand side.
    ResidualCheck {
        relative_residual: f64,
    },
    NonFinite(&'static str),
    InvalidConfig(&'static str),
    InfeasibleLoad,
    OracleDivergence {
        iteration: usize,
    },
    /// Failure raised inside a Newton iteration.
    AtIteration {
        iteration: usize,
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_iteration(self, iteration: usize) -> Self {
        Error::AtIteration {
            iteration,
            source: Box::new(self),
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::InvalidBranch { index, reason } => write!(f, "branch #{index}: {reason}"),
            Error::InvalidLoad { node, reason } => write!(f, "load at node {node}: {reason}"),
            Error::DuplicateBranch { from, to } => {
                write!(f, "duplicate branch between nodes {from} and {to}")
            }
            Error::Disconnected { node } => {
                write!(f, "node {node} has no in-service path to the slack")
            }
            Error::UnknownTie { from, to } => {
                write!(f, "tie line {from}-{to} does not match any branch")
            }
            Error::ShortCircuit { node, magnitude } => write!(
                f,
                "voltage magnitude {magnitude:e} pu at node {node} is below the short-circuit floor"
            ),
            Error::ZeroVoltage { node } => {
                write!(f, "zero voltage at node {node} makes |v|^alpha singular")
            }
            Error::SingularMatrix { pivot } => write!(f, "singular matrix at pivot {pivot}"),
            Error::ResidualCheck { relative_residual } => write!(
                f,
                "linear solve residual check failed (relative residual {relative_residual:e})"
            ),
            Error::NonFinite(what) => write!(f, "non-finite value in {what}"),
            Error::InvalidConfig(what) => write!(f, "invalid configuration: {what}"),
            Error::InfeasibleLoad => write!(f, "load exceeds the maximum transferable power"),
            Error::OracleDivergence { iteration } => {
                write!(f, "fixed-point iteration diverged at iteration {iteration}")
            }
            Error::AtIteration { iteration, source } => {
                write!(f, "newton iteration {iteration}: {source}")
            }
        }
    }
}

impl core::error::Error for Error {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        match self {
            Error::AtIteration { source, .. } => Some(source.as_ref()),
            _ => None,
        }
    }
}
