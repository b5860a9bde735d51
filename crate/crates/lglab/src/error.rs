//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide error type. Variants map onto the CLI exit codes:
/// configuration/domain/input errors exit 2, solver non-convergence
/// exits 3, capability limits exit 4.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed configuration: bad family id, parameter lengths, invalid
    /// solver settings, scheme/population mismatches.
    #[error("configuration error: {0}")]
    Config(String),

    /// Structurally valid input used outside its domain (dimension
    /// mismatches, empty profiles, index out of range).
    #[error("domain error: {0}")]
    Domain(String),

    /// Input that fails a semantic precondition, e.g. a societal summary
    /// that is not an equilibrium distribution of the game.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A hard implementation limit was exceeded; the message names the
    /// limit and, where one exists, the supported alternative.
    #[error("capability error: {0}")]
    Capability(String),

    /// The equilibrium solver did not reach the target tolerance.
    #[error("solver did not converge: best exploitability {exploitability:.3e} after {iters} iterations")]
    Solver { exploitability: f64, iters: usize },

    /// A bug: a state the implementation promises is unreachable.
    #[error("internal error: {0}")]
    Internal(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Domain(_) | Error::InvalidInput(_) => 2,
            Error::Solver { .. } => 3,
            Error::Capability(_) => 4,
            Error::Internal(_) | Error::Io(_) | Error::Json(_) => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
