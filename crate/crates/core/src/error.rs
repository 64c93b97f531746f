use thiserror::Error;

/// Errors raised by the numerical routines and model constructors.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {what} = {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("incomplete gamma did not converge at s = {s}, x = {x}")]
    IncompleteGamma { s: f64, x: f64 },

    #[error("incomplete beta did not converge at a = {a}, b = {b}, x = {x}")]
    IncompleteBeta { a: f64, b: f64, x: f64 },

    #[error("mixture series truncated after {terms} terms with mass {achieved_mass}")]
    Truncation { achieved_mass: f64, terms: usize },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("cost kind {0:?} is not supported here")]
    UnsupportedCostKind(crate::cost::VariableCostKind),

    #[error("model does not satisfy the preconditions: {0}")]
    UnsupportedModel(&'static str),

    #[error("condition undefined: {0}")]
    Undefined(&'static str),

    #[error("marginal density {density:e} too small to condition on")]
    Conditioning { density: f64 },

    #[error("repair model error: {0}")]
    Model(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("invalid configuration at `{field}`: {message}")]
    Config { field: String, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn ensure_positive(what: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::Domain { what, value })
    }
}

pub(crate) fn ensure_non_negative(what: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::Domain { what, value })
    }
}
