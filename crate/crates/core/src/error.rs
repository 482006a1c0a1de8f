use thiserror::Error;

#[derive(Debug, Error)]
pub enum TskError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("shape mismatch in {what}: {detail}")]
    ShapeMismatch { what: String, detail: String },

    #[error("degenerate firing: firing-level sum is zero")]
    DegenerateFiring,

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("N < R: {n_samples} samples for {n_rules} rules")]
    TooFewSamples { n_samples: usize, n_rules: usize },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("label {label} out of range for {n_classes} classes")]
    LabelOutOfRange { label: usize, n_classes: usize },

    #[error("task mismatch: {0}")]
    TaskMismatch(String),

    #[error("training diverged at epoch {epoch}: loss is not finite")]
    Diverged { epoch: usize },

    #[error("empty dataset")]
    EmptyData,

    #[error("unsupported schema version {0}")]
    UnsupportedSchema(i64),

    #[error("malformed model file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl TskError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        TskError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = TskError> = std::result::Result<T, E>;
