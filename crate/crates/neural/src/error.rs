use thiserror::Error;

pub type Result<T> = std::result::Result<T, NeuralError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NeuralError {
    #[error("shape mismatch: expected {expected:?}, got {actual:?}")]
    ShapeMismatch {
        expected: Vec<usize>,
        actual: Vec<usize>,
    },

    #[error("tensor data length {len} does not match shape {shape:?}")]
    DataLength { shape: Vec<usize>, len: usize },

    #[error("invalid layer: {0}")]
    InvalidLayer(String),

    #[error("lookback {lookback} is too small (minimum {minimum})")]
    LookbackTooSmall { lookback: usize, minimum: usize },

    #[error("series of length {len} is too short (need at least {required})")]
    SeriesTooShort { len: usize, required: usize },

    #[error("non-finite gradient for parameter tensor {index}")]
    NonFiniteGradient { index: usize },

    #[error("training diverged at epoch {epoch}: loss is not finite")]
    TrainingDiverged { epoch: usize },

    #[error("invalid training config: {0}")]
    InvalidConfig(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),
}
