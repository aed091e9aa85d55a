//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the basis, solver, analytic and I/O layers.
#[derive(Debug, Error)]
pub enum Error {
    /// A basis (or an expansion) would exceed the supported dimension.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// A precondition on the inputs was violated.
    #[error("domain error: {0}")]
    Domain(String),

    /// The iterative eigensolver failed to reach the requested residual.
    #[error(
        "eigensolver did not converge after {restarts} restarts \
         (best residual {best_residual:.3e}, tol {tol:.3e})"
    )]
    Convergence {
        restarts: usize,
        best_residual: f64,
        tol: f64,
    },

    /// A perturbative denominator vanished (resonant disorder draw).
    #[error("resonant disorder: vanishing denominator between sites {site} and {neighbor}")]
    Singularity { site: usize, neighbor: usize },

    /// The requested state is not unique.
    #[error("degenerate ground state: {0}")]
    Degeneracy(String),

    /// Root bracketing failed for a phase-boundary solve.
    #[error("no sign change in bracket [{lo}, {hi}]")]
    RootBracket { lo: f64, hi: f64 },

    /// A text or binary input could not be parsed.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// An invalid run configuration.
    #[error("config error: {0}")]
    Config(String),

    /// A failed cell of an ensemble scan, with its coordinates.
    #[error("cell (tau={tau}, delta={delta}) failed: {source}")]
    Cell {
        tau: f64,
        delta: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn capacity(msg: impl Into<String>) -> Self {
        Error::Capacity(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
