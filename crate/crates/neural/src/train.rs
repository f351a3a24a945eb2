use serde::{Deserialize, Serialize};

use crate::error::{NeuralError, Result};
use crate::network::Network;
use crate::optim::adam_step;
use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 100,
            learning_rate: 0.001,
            batch_size: 32,
            seed: 0,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(NeuralError::InvalidConfig(msg));
        if self.epochs == 0 {
            return bad("epochs must be >= 1".into());
        }
        if self.batch_size == 0 {
            return bad("batch_size must be >= 1".into());
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate {} is invalid", self.learning_rate));
        }
        for (name, beta) in [
            ("adam_beta1", self.adam_beta1),
            ("adam_beta2", self.adam_beta2),
        ] {
            if !(beta > 0.0 && beta < 1.0) {
                return bad(format!("{name} must lie in (0, 1), got {beta}"));
            }
        }
        if !(self.adam_epsilon > 0.0) {
            return bad(format!(
                "adam_epsilon must be > 0, got {}",
                self.adam_epsilon
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Mean squared error over each epoch's forward passes.
    pub loss_history: Vec<f64>,
}

impl TrainReport {
    pub fn final_loss(&self) -> f64 {
        *self.loss_history.last().expect("at least one epoch")
    }
}

/// Sliding windows: sample `i` is `values[i..i + lookback]` → `values[i + lookback]`.
pub fn make_supervised_windows(values: &[f64], lookback: usize) -> Result<(Vec<Tensor>, Vec<f64>)> {
    if lookback == 0 {
        return Err(NeuralError::LookbackTooSmall {
            lookback,
            minimum: 1,
        });
    }
    if values.len() < lookback + 1 {
        return Err(NeuralError::SeriesTooShort {
            len: values.len(),
            required: lookback + 1,
        });
    }
    let count = values.len() - lookback;
    let inputs = (0..count)
        .map(|i| Tensor::column(&values[i..i + lookback]))
        .collect();
    let targets = values[lookback..].to_vec();
    Ok((inputs, targets))
}

/// Mini-batch Adam over the samples in their given (chronological) order.
pub fn train(
    network: &mut Network,
    inputs: &[Tensor],
    targets: &[f64],
    config: &TrainConfig,
) -> Result<TrainReport> {
    config.validate()?;
    if inputs.is_empty() {
        return Err(NeuralError::SeriesTooShort {
            len: 0,
            required: 1,
        });
    }
    if inputs.len() != targets.len() {
        return Err(NeuralError::ShapeMismatch {
            expected: vec![inputs.len()],
            actual: vec![targets.len()],
        });
    }

    let mut grads = network.zero_gradients();
    let mut loss_history = Vec::with_capacity(config.epochs);
    for epoch in 1..=config.epochs {
        let mut total = 0.0;
        for (xs, ys) in inputs
            .chunks(config.batch_size)
            .zip(targets.chunks(config.batch_size))
        {
            total += network.batch_gradients(xs, ys, &mut grads)?;
            if !grads.is_finite() {
                return Err(NeuralError::TrainingDiverged { epoch });
            }
            adam_step(network, &grads, config)?;
        }
        let loss = total / inputs.len() as f64;
        if !loss.is_finite() {
            return Err(NeuralError::TrainingDiverged { epoch });
        }
        loss_history.push(loss);
    }
    Ok(TrainReport { loss_history })
}

impl Network {
    pub fn mean_squared_error(&self, inputs: &[Tensor], targets: &[f64]) -> Result<f64> {
        let mut total = 0.0;
        for (x, &y) in inputs.iter().zip(targets) {
            let p = self.forward(x)?;
            total += (p - y) * (p - y);
        }
        Ok(total / inputs.len().max(1) as f64)
    }
}
