use thiserror::Error;

/// Errors raised by the evaluation layer (models, evaluators, diagnostics, harness).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("tail expression evaluated to {value} at k={k}, eps={eps}; tails must lie in [0, 1]")]
    ExpressionOutOfRange { value: f64, k: String, eps: String },

    #[error("invalid lacunary sequence: {0}")]
    InvalidLacunary(String),

    #[error("enumeration cap exceeded: {what} needs {needed} steps but the cap is {cap}")]
    EnumerationCapExceeded {
        what: &'static str,
        needed: String,
        cap: u64,
    },

    #[error("monotonicity violated: tail({k1}) = {v1} but tail({k2}) = {v2}")]
    MonotonicityViolated {
        k1: String,
        v1: f64,
        k2: String,
        v2: f64,
    },

    #[error("off-tail is not declared monotone; use enumeration instead")]
    MonotonicityUndeclared,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("unknown check id `{0}`")]
    UnknownCheckId(String),

    #[error("uniqueness check needs a declared separation between the two limits")]
    MissingSeparationDeclaration,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
