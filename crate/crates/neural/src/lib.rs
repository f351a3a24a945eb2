//! A deliberately small neural network stack: row-major `f64` tensors, the
//! handful of layer kinds needed for one-step-ahead regression
//! (`conv1d`, `maxpool1d`, `flatten`, `dense`, `lstm`), exact backpropagation,
//! and an Adam optimizer.
//!
//! Every network maps a `[lookback, features]` window to a single scalar.
//! Training is deterministic: the seed fixes the initial parameters and
//! mini-batches are visited in chronological order.

mod checkpoint;
mod error;
mod layer;
mod lstm;
mod network;
mod optim;
mod tensor;
mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint, CHECKPOINT_VERSION};
pub use error::{NeuralError, Result};
pub use layer::{Activation, LayerSpec};
pub use network::{build_cnn_forecaster, build_lstm_forecaster, Gradients, Network};
pub use optim::{adam_step, AdamState};
pub use tensor::Tensor;
pub use train::{make_supervised_windows, train, TrainConfig, TrainReport};
