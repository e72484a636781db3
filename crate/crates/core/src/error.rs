use thiserror::Error;

/// Errors raised across the laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("symplectic vectors need even length, got {0}")]
    OddLength(usize),

    /// A desk-scale guard refused the request. `guard` names the cap that fired.
    #[error("budget exceeded: {guard} (requested {requested}, limit {limit})")]
    Budget {
        guard: &'static str,
        requested: usize,
        limit: usize,
    },

    #[error("subspace is not isotropic")]
    NotIsotropic,

    #[error("subspace is not Lagrangian")]
    NotLagrangian,

    #[error("matrix is not symplectic")]
    NotSymplectic,

    #[error("map does not preserve the symplectic form")]
    NotFormPreserving,

    #[error("inconsistent stabilizer tableau: {0}")]
    InconsistentTableau(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error: {0}")]
    Parse(String),

    /// A guaranteed property failed to hold.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn budget(guard: &'static str, requested: usize, limit: usize) -> Result<()> {
    if requested > limit {
        Err(Error::Budget {
            guard,
            requested,
            limit,
        })
    } else {
        Ok(())
    }
}
