use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed chain or bath definition (bad site index, duplicate coupling, ...).
    #[error("specification error: {0}")]
    Specification(String),
    /// Input that violates an operation's precondition.
    #[error("validation error: {0}")]
    Validation(String),
    /// Argument outside the mathematical domain of a function.
    #[error("domain error: {0}")]
    Domain(String),
    /// Problem too large for dense or exhaustive treatment.
    #[error("capacity error: {0}")]
    Capacity(String),
    /// Degenerate spectrum or gaps where nondegeneracy is required.
    #[error("degeneracy error: {0}")]
    Degeneracy(String),
    /// A numerical result broke an invariant it must satisfy.
    #[error("numerical integrity error: {0}")]
    NumericalIntegrity(String),
}

impl Error {
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NumericalIntegrity(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
