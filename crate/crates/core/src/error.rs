use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    Dimension {
        context: &'static str,
        expected: String,
        got: String,
    },

    /// `AᵀJA` is not positive definite, so the ILS problem has no unique solution.
    #[error("AᵀJA is not positive definite; the problem has no unique solution")]
    NotPositiveDefinite,

    #[error("condition number undefined: {0}")]
    UndefinedConditionNumber(&'static str),

    #[error("not implemented: {0}")]
    NotImplemented(String),

    #[error("dense Jacobian would need {entries} entries (limit {limit})")]
    MemoryGuard { entries: usize, limit: usize },

    #[error("matrix is numerically rank deficient (sigma_min / sigma_max = {0:e})")]
    RankDeficient(f64),

    /// The smallest singular value of `[A, b]` is not separated from that of `A`.
    #[error("TLS problem is not generic: sigma_tilde = {sigma_tilde:e}, sigma_n = {sigma_n:e}")]
    TlsNotGeneric { sigma_tilde: f64, sigma_n: f64 },

    #[error("TLS condition path needs sigma_tilde > {threshold:e}, got {sigma_tilde:e}")]
    TlsConsistent { sigma_tilde: f64, threshold: f64 },

    #[error("data violates {kind} structure at ({row}, {col}): deviation {deviation:e}")]
    StructureViolation {
        kind: String,
        row: usize,
        col: usize,
        deviation: f64,
    },

    #[error("unsupported structure: {0}")]
    UnsupportedStructure(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("generation failed after {attempts} attempts: {reason}")]
    Generation { attempts: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn dim_err(context: &'static str, expected: impl ToString, got: impl ToString) -> Error {
    Error::Dimension {
        context,
        expected: expected.to_string(),
        got: got.to_string(),
    }
}
