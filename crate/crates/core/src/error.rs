use alloc::string::String;

/// Failures reported by validation and by operations whose preconditions
/// are not met.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IblError {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: String,
        expected: usize,
        found: usize,
    },
    #[error("non-finite entry in {0}")]
    NotFinite(String),
    #[error("kernel matrix is not symmetric (asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("factor {0} is not surjective")]
    NotSurjective(usize),
    #[error("exponent of factor {factor} has the wrong sign for m_plus = {m_plus}")]
    SignOrder { factor: usize, m_plus: usize },
    #[error("m_plus = {m_plus} exceeds the number of factors {m}")]
    MPlusOutOfRange { m_plus: usize, m: usize },
    #[error("{0} is not positive definite")]
    NotPositiveDefinite(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("{what}: residual {residual:e} exceeds {bound:e}")]
    Tolerance {
        what: String,
        residual: f64,
        bound: f64,
    },
}

pub type Result<T> = core::result::Result<T, IblError>;
