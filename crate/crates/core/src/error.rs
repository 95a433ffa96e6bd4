use thiserror::Error;

pub type Result<T> = std::result::Result<T, MaskError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MaskError {
    /// Two objects that must share a shape do not.
    #[error("shape mismatch: expected {expected}, got {actual}")]
    Shape { expected: String, actual: String },

    #[error("invalid argument: {0}")]
    Argument(String),

    /// The requested input dimension exceeds `d^floor(m/2)`.
    #[error("masking bound violated: w = {w} exceeds d^floor(m/2) = {bound} for d = {d}, m = {m}")]
    BoundViolation {
        w: usize,
        d: usize,
        m: usize,
        bound: usize,
    },

    #[error("unsupported party count m = {m}: schemes are only constructed for m >= 4")]
    Unsupported { m: usize },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl MaskError {
    pub(crate) fn shape(expected: impl ToString, actual: impl ToString) -> Self {
        MaskError::Shape {
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }
}
