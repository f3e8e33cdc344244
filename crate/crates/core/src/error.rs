use thiserror::Error;

/// Which standing assumption on the problem was found violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Assumption {
    /// `u0` critical for every λ and the hessian there linear in λ.
    CriticalBasePoint,
    /// Invariance of the potential under the group.
    Invariance,
    /// Nondegeneracy of the trivial orbit.
    Nondegenerate,
}

impl std::fmt::Display for Assumption {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Assumption::CriticalBasePoint => "critical base point",
            Assumption::Invariance => "invariance",
            Assumption::Nondegenerate => "nondegenerate orbit",
        })
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("group too large: order {order} exceeds the cap of {cap}")]
    GroupTooLarge { order: usize, cap: usize },

    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("invalid representation: {0}")]
    InvalidRepresentation(String),

    #[error("not realizable as integral Burnside element: {0}")]
    NotIntegral(String),

    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),

    #[error("assumption violated ({assumption}): {detail}")]
    AssumptionViolated { assumption: Assumption, detail: String },

    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    #[error("spectrum cutoff {cutoff} too small: need at least {needed}")]
    CutoffTooSmall { cutoff: String, needed: String },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("quadrature inadequate: {0}")]
    Quadrature(String),

    #[error("newton failed after {iterations} iterations (residual {residual:e})")]
    NewtonFailed { iterations: usize, residual: f64 },

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn assumption(assumption: Assumption, detail: impl Into<String>) -> Self {
        Error::AssumptionViolated { assumption, detail: detail.into() }
    }

    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::AssumptionViolated { .. } => 2,
            Error::NumericalDegeneracy(_)
            | Error::NewtonFailed { .. }
            | Error::Quadrature(_)
            | Error::NotIntegral(_) => 3,
            _ => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
