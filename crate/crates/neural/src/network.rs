use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{NeuralError, Result};
use crate::layer::{Activation, Cache, Layer, LayerSpec};
use crate::optim::AdamState;
use crate::tensor::Tensor;

/// Hidden widths of the two forecaster architectures.
pub const CNN_FILTERS: usize = 64;
pub const CNN_KERNEL: usize = 3;
pub const CNN_POOL: usize = 2;
pub const CNN_DENSE_UNITS: usize = 50;
pub const LSTM_UNITS: usize = 50;

/// Per-parameter gradients, in the same order as [`Network::parameters`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients(pub Vec<Tensor>);

impl Gradients {
    pub fn tensors(&self) -> &[Tensor] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(Tensor::is_finite)
    }

    fn clear(&mut self) {
        self.0.iter_mut().for_each(|t| t.fill(0.0));
    }

    fn scale(&mut self, factor: f64) {
        for t in &mut self.0 {
            t.data_mut().iter_mut().for_each(|v| *v *= factor);
        }
    }
}

/// A feed-forward stack of layers ending in one scalar, plus the Adam state
/// for its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    input_shape: Vec<usize>,
    pub(crate) layers: Vec<Layer>,
    pub(crate) optimizer: AdamState,
}

impl Network {
    pub fn new(input_shape: &[usize], specs: &[LayerSpec], seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut shape = input_shape.to_vec();
        let mut layers = Vec::with_capacity(specs.len());
        for &spec in specs {
            let layer = Layer::init(spec, &shape, &mut rng)?;
            shape = layer.output_shape.clone();
            layers.push(layer);
        }
        if shape != [1] {
            return Err(NeuralError::InvalidLayer(format!(
                "network must end in a single scalar, got output shape {shape:?}"
            )));
        }
        Ok(Self::from_layers(input_shape.to_vec(), layers))
    }

    pub(crate) fn from_layers(input_shape: Vec<usize>, layers: Vec<Layer>) -> Self {
        let optimizer = AdamState::for_shapes(
            layers
                .iter()
                .flat_map(|l| l.params.iter().map(|p| p.shape().to_vec())),
        );
        Self {
            input_shape,
            layers,
            optimizer,
        }
    }

    pub fn input_shape(&self) -> &[usize] {
        &self.input_shape
    }

    pub fn layer_specs(&self) -> Vec<LayerSpec> {
        self.layers.iter().map(|l| l.spec).collect()
    }

    /// Output shape of every layer, in order.
    pub fn layer_output_shapes(&self) -> Vec<Vec<usize>> {
        self.layers.iter().map(|l| l.output_shape.clone()).collect()
    }

    pub fn layer_param_counts(&self) -> Vec<usize> {
        self.layers.iter().map(Layer::param_count).collect()
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Layer::param_count).sum()
    }

    pub fn parameters(&self) -> impl Iterator<Item = &Tensor> {
        self.layers.iter().flat_map(|l| l.params.iter())
    }

    pub fn parameters_mut(&mut self) -> impl Iterator<Item = &mut Tensor> {
        self.layers.iter_mut().flat_map(|l| l.params.iter_mut())
    }

    pub fn optimizer(&self) -> &AdamState {
        &self.optimizer
    }

    pub fn zero_gradients(&self) -> Gradients {
        Gradients(
            self.parameters()
                .map(|p| Tensor::zeros(p.shape()))
                .collect(),
        )
    }

    pub fn forward(&self, input: &Tensor) -> Result<f64> {
        let mut x = input.clone();
        for layer in &self.layers {
            x = layer.forward(&x)?.0;
        }
        Ok(x.data()[0])
    }

    /// Gradients of `(prediction − target)²` with respect to every
    /// parameter. Returns the prediction alongside.
    pub fn backward(&self, input: &Tensor, target: f64) -> Result<(f64, Gradients)> {
        let mut grads = self.zero_gradients();
        let prediction = self.accumulate(input, target, 1.0, &mut grads)?;
        Ok((prediction, grads))
    }

    /// Adds `weight · ∂(prediction − target)²/∂θ` into `grads`.
    pub(crate) fn accumulate(
        &self,
        input: &Tensor,
        target: f64,
        weight: f64,
        grads: &mut Gradients,
    ) -> Result<f64> {
        let mut caches: Vec<Cache> = Vec::with_capacity(self.layers.len());
        let mut x = input.clone();
        for layer in &self.layers {
            let (y, cache) = layer.forward(&x)?;
            caches.push(cache);
            x = y;
        }
        let prediction = x.data()[0];
        let mut grad = Tensor::from_parts(vec![1], vec![weight * 2.0 * (prediction - target)]);

        let mut offset: usize = self.layers.iter().map(|l| l.params.len()).sum();
        for (layer, cache) in self.layers.iter().zip(&caches).rev() {
            offset -= layer.params.len();
            let slot = &mut grads.0[offset..offset + layer.params.len()];
            grad = layer.backward(cache, &grad, slot);
        }
        Ok(prediction)
    }

    pub(crate) fn batch_gradients(
        &self,
        inputs: &[Tensor],
        targets: &[f64],
        grads: &mut Gradients,
    ) -> Result<f64> {
        grads.clear();
        let weight = 1.0 / inputs.len() as f64;
        let mut loss = 0.0;
        for (x, &y) in inputs.iter().zip(targets) {
            let p = self.accumulate(x, y, 1.0, grads)?;
            loss += (p - y) * (p - y);
        }
        grads.scale(weight);
        Ok(loss)
    }
}

/// conv1d(64, 3, relu) → maxpool1d(2) → flatten → dense(50, relu) → dense(1).
pub fn build_cnn_forecaster(lookback: usize, seed: u64) -> Result<Network> {
    let minimum = CNN_KERNEL + CNN_POOL - 1;
    if lookback < minimum {
        return Err(NeuralError::LookbackTooSmall { lookback, minimum });
    }
    Network::new(
        &[lookback, 1],
        &[
            LayerSpec::Conv1d {
                filters: CNN_FILTERS,
                kernel_size: CNN_KERNEL,
                activation: Activation::Relu,
            },
            LayerSpec::MaxPool1d {
                pool_size: CNN_POOL,
            },
            LayerSpec::Flatten,
            LayerSpec::Dense {
                units: CNN_DENSE_UNITS,
                activation: Activation::Relu,
            },
            LayerSpec::Dense {
                units: 1,
                activation: Activation::Linear,
            },
        ],
        seed,
    )
}

/// lstm(50, full sequence) → lstm(50, last state) → dense(1).
pub fn build_lstm_forecaster(lookback: usize, seed: u64) -> Result<Network> {
    if lookback == 0 {
        return Err(NeuralError::LookbackTooSmall {
            lookback,
            minimum: 1,
        });
    }
    Network::new(
        &[lookback, 1],
        &[
            LayerSpec::Lstm {
                units: LSTM_UNITS,
                return_sequences: true,
            },
            LayerSpec::Lstm {
                units: LSTM_UNITS,
                return_sequences: false,
            },
            LayerSpec::Dense {
                units: 1,
                activation: Activation::Linear,
            },
        ],
        seed,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cnn_shapes_for_lookback_ten() {
        let net = build_cnn_forecaster(10, 7).unwrap();
        let shapes = net.layer_output_shapes();
        assert_eq!(shapes[0], vec![8, 64]);
        assert_eq!(shapes[1], vec![4, 64]);
        assert_eq!(shapes[2], vec![256]);
        assert_eq!(shapes[3], vec![50]);
        assert_eq!(shapes[4], vec![1]);
    }

    #[test]
    fn cnn_lookback_three_rejected() {
        assert!(matches!(
            build_cnn_forecaster(3, 0),
            Err(NeuralError::LookbackTooSmall { lookback: 3, .. })
        ));
        assert!(build_cnn_forecaster(4, 0).is_ok());
    }

    #[test]
    fn lstm_shapes_and_param_count() {
        let net = build_lstm_forecaster(10, 7).unwrap();
        let shapes = net.layer_output_shapes();
        assert_eq!(shapes[0], vec![10, 50]);
        assert_eq!(shapes[1], vec![50]);
        let counts = net.layer_param_counts();
        assert_eq!(counts[0], 4 * (50 * (1 + 50) + 50));
        assert_eq!(counts[0], 10_400);
        assert_eq!(counts[1], 4 * (50 * (50 + 50) + 50));
        assert_eq!(counts[2], 51);
    }

    #[test]
    fn same_seed_same_parameters() {
        let a = build_cnn_forecaster(10, 99).unwrap();
        let b = build_cnn_forecaster(10, 99).unwrap();
        assert_eq!(a, b);
        let c = build_cnn_forecaster(10, 100).unwrap();
        assert_ne!(a, c);
        assert_eq!(
            build_lstm_forecaster(10, 5).unwrap(),
            build_lstm_forecaster(10, 5).unwrap()
        );
    }

    #[test]
    fn zero_parameters_predict_zero() {
        for mut net in [
            build_cnn_forecaster(10, 1).unwrap(),
            build_lstm_forecaster(10, 1).unwrap(),
        ] {
            net.parameters_mut().for_each(|p| p.fill(0.0));
            let x = Tensor::column(&[0.3, 0.1, 0.9, 0.2, 0.5, 0.5, 0.7, 0.1, 0.4, 0.8]);
            assert_eq!(net.forward(&x).unwrap(), 0.0);
        }
    }

    #[test]
    fn zero_error_gives_zero_output_bias_gradient() {
        let net = build_cnn_forecaster(10, 3).unwrap();
        let x = Tensor::column(&[0.1; 10]);
        let p = net.forward(&x).unwrap();
        let (_, grads) = net.backward(&x, p).unwrap();
        let last = grads.tensors().last().unwrap();
        assert_eq!(last.data(), &[0.0]);
    }

    #[test]
    fn forward_rejects_misaligned_input() {
        let net = build_lstm_forecaster(10, 3).unwrap();
        assert!(matches!(
            net.forward(&Tensor::column(&[0.0; 9])),
            Err(NeuralError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn network_must_end_in_scalar() {
        let err = Network::new(
            &[4, 1],
            &[
                LayerSpec::Flatten,
                LayerSpec::Dense {
                    units: 2,
                    activation: Activation::Linear,
                },
            ],
            0,
        );
        assert!(err.is_err());
    }
}
