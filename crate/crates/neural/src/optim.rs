use serde::{Deserialize, Serialize};

use crate::error::{NeuralError, Result};
use crate::network::{Gradients, Network};
use crate::train::TrainConfig;

/// First/second moment accumulators, one buffer per parameter tensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub step: u64,
    pub first_moment: Vec<Vec<f64>>,
    pub second_moment: Vec<Vec<f64>>,
}

impl AdamState {
    pub(crate) fn for_shapes(shapes: impl Iterator<Item = Vec<usize>>) -> Self {
        let first_moment: Vec<Vec<f64>> = shapes.map(|s| vec![0.0; s.iter().product()]).collect();
        let second_moment = first_moment.clone();
        Self {
            step: 0,
            first_moment,
            second_moment,
        }
    }
}

/// One bias-corrected Adam update of every parameter.
pub fn adam_step(network: &mut Network, gradients: &Gradients, config: &TrainConfig) -> Result<()> {
    let tensors = gradients.tensors();
    if tensors.len() != network.optimizer.first_moment.len() {
        return Err(NeuralError::ShapeMismatch {
            expected: vec![network.optimizer.first_moment.len()],
            actual: vec![tensors.len()],
        });
    }
    if let Some(index) = tensors.iter().position(|t| !t.is_finite()) {
        return Err(NeuralError::NonFiniteGradient { index });
    }

    let (beta1, beta2) = (config.adam_beta1, config.adam_beta2);
    let state = &mut network.optimizer;
    state.step += 1;
    let t = state.step as i32;
    let correction1 = 1.0 - beta1.powi(t);
    let correction2 = 1.0 - beta2.powi(t);
    let lr = config.learning_rate;
    let eps = config.adam_epsilon;

    let moments = state
        .first_moment
        .iter_mut()
        .zip(state.second_moment.iter_mut());
    let params = network.layers.iter_mut().flat_map(|l| l.params.iter_mut());
    for ((param, grad), (m, v)) in params.zip(tensors).zip(moments) {
        if param.shape() != grad.shape() {
            return Err(NeuralError::ShapeMismatch {
                expected: param.shape().to_vec(),
                actual: grad.shape().to_vec(),
            });
        }
        for (((p, &g), m), v) in param
            .data_mut()
            .iter_mut()
            .zip(grad.data())
            .zip(m.iter_mut())
            .zip(v.iter_mut())
        {
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            let m_hat = *m / correction1;
            let v_hat = *v / correction2;
            *p -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
    Ok(())
}
