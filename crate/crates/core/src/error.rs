use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    Dimension {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("invalid tolerances: {0}")]
    Tolerance(String),

    #[error("validation failed: {0}")]
    Validation(String),

    /// A documented precondition of an operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A numerical self-check failed; usually means the tolerances are too
    /// tight or too loose for the input.
    #[error("internal consistency check failed: {0}")]
    InternalConsistency(String),

    #[error("algebra generation did not stabilize within {limit} growth steps")]
    NonConvergence { limit: usize },

    /// The two sides of the Uhlmann/Haag equivalence disagreed. In finite
    /// dimensions the equivalence is exact, so this always indicates a bug.
    #[error("theorem violation: {0}")]
    TheoremViolation(String),

    #[error("invalid lattice geometry: {0}")]
    Geometry(String),

    #[error("failed to load {path}: {message}")]
    Load { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Errors that stem from bad input rather than from the library itself.
    pub fn is_user_error(&self) -> bool {
        matches!(
            self,
            Error::Dimension { .. }
                | Error::NotSquare { .. }
                | Error::Tolerance(_)
                | Error::Validation(_)
                | Error::Precondition(_)
                | Error::Geometry(_)
                | Error::Load { .. }
        )
    }
}
