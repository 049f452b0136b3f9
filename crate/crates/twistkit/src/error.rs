//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("degree must be at least 3, got {0}")]
    DegreeTooSmall(u32),

    #[error("unknown parameter `{0}` for this degree")]
    UnknownParameter(String),

    #[error("assignment is missing parameter `{0}`")]
    MissingParameter(String),

    #[error("parameter rings differ")]
    RingMismatch,

    #[error("quotient contexts differ: `{0}` vs `{1}`")]
    ContextMismatch(String, String),

    #[error("symbol {0} does not belong to context `{1}`")]
    SymbolOutOfContext(String, String),

    #[error("polynomial division is not exact")]
    InexactDivision,

    #[error("bidegrees differ: ({0},{1}) vs ({2},{3})")]
    BidegreeMismatch(u16, u16, u16, u16),

    #[error("monomial {0} obstructs division by {1}")]
    NotDivisible(String, String),

    #[error("input is not homogeneous: expected degree {expected}, found term of degree {found}")]
    Inhomogeneous { expected: u32, found: u32 },

    #[error("module shapes do not match: {0}")]
    ModuleMismatch(String),

    #[error("the two derivations of the {symbol} row disagree: {details}")]
    InconsistentRow { symbol: String, details: String },

    #[error("substitution table is inconsistent: {0}")]
    RelationFailure(String),

    #[error("global-sections matrix of the constant part is not a signed permutation: {0}")]
    NotSignedPermutation(String),

    #[error("target monomial {0} is outside the invertible range")]
    NotInvertible(String),

    #[error("kernel composition has a nonzero residual: {0}")]
    KernelResidual(String),

    #[error("h0 data is not realizable by a splitting type: {0}")]
    InconsistentH0(String),

    #[error("invalid point: ({0} : {1}) is not a point of P^1")]
    InvalidPoint(String, String),

    #[error("{0}")]
    Precondition(String),

    #[error("malformed rational literal `{0}`")]
    BadRational(String),

    #[error("malformed parameter file: {0}")]
    BadParamFile(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
