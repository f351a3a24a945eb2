use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{NeuralError, Result};
use crate::lstm::{self, LstmCache};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Linear,
    Relu,
}

impl Activation {
    #[inline]
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Linear => x,
            Activation::Relu => x.max(0.0),
        }
    }

    /// Derivative expressed through the activation's output.
    #[inline]
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Linear => 1.0,
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Layer kinds and their hyper-parameters. Inputs are `[time, features]`
/// for the sequence layers and `[width]` for dense layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayerSpec {
    Conv1d {
        filters: usize,
        kernel_size: usize,
        activation: Activation,
    },
    #[serde(rename = "maxpool1d")]
    MaxPool1d {
        pool_size: usize,
    },
    Flatten,
    Dense {
        units: usize,
        activation: Activation,
    },
    Lstm {
        units: usize,
        return_sequences: bool,
    },
}

impl LayerSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(NeuralError::InvalidLayer(msg.to_string()));
        match *self {
            LayerSpec::Conv1d {
                filters,
                kernel_size,
                ..
            } => {
                if filters == 0 {
                    return bad("conv1d needs at least one filter");
                }
                if kernel_size == 0 {
                    return bad("conv1d kernel_size must be >= 1");
                }
            }
            LayerSpec::MaxPool1d { pool_size } if pool_size == 0 => {
                return bad("maxpool1d pool_size must be >= 1");
            }
            LayerSpec::Dense { units, .. } if units == 0 => {
                return bad("dense needs at least one unit");
            }
            LayerSpec::Lstm { units, .. } if units == 0 => {
                return bad("lstm needs at least one unit");
            }
            _ => {}
        }
        Ok(())
    }

    /// Output shape for a given input shape, or `ShapeMismatch` when the
    /// layer cannot consume that input.
    pub fn output_shape(&self, input: &[usize]) -> Result<Vec<usize>> {
        self.validate()?;
        let mismatch = |expected: Vec<usize>| NeuralError::ShapeMismatch {
            expected,
            actual: input.to_vec(),
        };
        match *self {
            LayerSpec::Conv1d {
                filters,
                kernel_size,
                ..
            } => match input {
                &[len, channels] if len >= kernel_size && channels > 0 => {
                    Ok(vec![len - kernel_size + 1, filters])
                }
                _ => Err(mismatch(vec![kernel_size, 1])),
            },
            LayerSpec::MaxPool1d { pool_size } => match input {
                &[len, channels] if len >= pool_size => Ok(vec![len / pool_size, channels]),
                _ => Err(mismatch(vec![pool_size, 1])),
            },
            LayerSpec::Flatten => match input {
                &[len, channels] => Ok(vec![len * channels]),
                _ => Err(mismatch(vec![1, 1])),
            },
            LayerSpec::Dense { units, .. } => match input {
                &[_] => Ok(vec![units]),
                _ => Err(mismatch(vec![1])),
            },
            LayerSpec::Lstm {
                units,
                return_sequences,
            } => match input {
                &[steps, features] if steps > 0 && features > 0 => {
                    if return_sequences {
                        Ok(vec![steps, units])
                    } else {
                        Ok(vec![units])
                    }
                }
                _ => Err(mismatch(vec![1, 1])),
            },
        }
    }
}

/// A layer with its resolved shapes and parameter tensors.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Layer {
    pub spec: LayerSpec,
    pub input_shape: Vec<usize>,
    pub output_shape: Vec<usize>,
    pub params: Vec<Tensor>,
}

/// Intermediate values kept from the forward pass for backpropagation.
pub(crate) enum Cache {
    Conv { input: Tensor, output: Tensor },
    Pool { argmax: Vec<usize> },
    Flatten,
    Dense { input: Tensor, output: Tensor },
    Lstm(Box<LstmCache>),
}

fn glorot<R: Rng>(rng: &mut R, shape: &[usize], fan_in: usize, fan_out: usize) -> Tensor {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let len = shape.iter().product();
    let data = (0..len).map(|_| rng.random_range(-limit..limit)).collect();
    Tensor::from_parts(shape.to_vec(), data)
}

impl Layer {
    /// Parameter tensors laid out as:
    /// conv1d `[kernel, in_channels, filters]` + bias `[filters]`;
    /// dense `[units, width]` + bias `[units]`;
    /// lstm input weights `[features, 4·units]`, recurrent weights
    /// `[units, 4·units]` and bias `[4·units]`, gates ordered i, f, g, o.
    pub fn init<R: Rng>(spec: LayerSpec, input_shape: &[usize], rng: &mut R) -> Result<Self> {
        let output_shape = spec.output_shape(input_shape)?;
        let params = match spec {
            LayerSpec::Conv1d {
                filters,
                kernel_size,
                ..
            } => {
                let channels = input_shape[1];
                vec![
                    glorot(
                        rng,
                        &[kernel_size, channels, filters],
                        kernel_size * channels,
                        kernel_size * filters,
                    ),
                    Tensor::zeros(&[filters]),
                ]
            }
            LayerSpec::Dense { units, .. } => {
                let width = input_shape[0];
                vec![
                    glorot(rng, &[units, width], width, units),
                    Tensor::zeros(&[units]),
                ]
            }
            LayerSpec::Lstm { units, .. } => {
                let features = input_shape[1];
                let w_input = glorot(rng, &[features, 4 * units], features, 4 * units);
                let w_recurrent = glorot(rng, &[units, 4 * units], units, 4 * units);
                let mut bias = Tensor::zeros(&[4 * units]);
                // forget gate starts open
                bias.data_mut()[units..2 * units].fill(1.0);
                vec![w_input, w_recurrent, bias]
            }
            LayerSpec::MaxPool1d { .. } | LayerSpec::Flatten => Vec::new(),
        };
        Ok(Self {
            spec,
            input_shape: input_shape.to_vec(),
            output_shape,
            params,
        })
    }

    pub fn param_count(&self) -> usize {
        self.params.iter().map(Tensor::len).sum()
    }

    pub fn forward(&self, input: &Tensor) -> Result<(Tensor, Cache)> {
        if input.shape() != self.input_shape.as_slice() {
            return Err(NeuralError::ShapeMismatch {
                expected: self.input_shape.clone(),
                actual: input.shape().to_vec(),
            });
        }
        Ok(match self.spec {
            LayerSpec::Conv1d {
                filters,
                kernel_size,
                activation,
            } => {
                let channels = self.input_shape[1];
                let steps = self.output_shape[0];
                let weights = self.params[0].data();
                let bias = self.params[1].data();
                let x = input.data();
                let mut out = vec![0.0; steps * filters];
                for (t, row) in out.chunks_exact_mut(filters).enumerate() {
                    row.copy_from_slice(bias);
                    for k in 0..kernel_size {
                        for c in 0..channels {
                            let xv = x[(t + k) * channels + c];
                            let w = &weights[(k * channels + c) * filters..][..filters];
                            for (o, &wv) in row.iter_mut().zip(w) {
                                *o += xv * wv;
                            }
                        }
                    }
                    row.iter_mut().for_each(|o| *o = activation.apply(*o));
                }
                let output = Tensor::from_parts(self.output_shape.clone(), out);
                (
                    output.clone(),
                    Cache::Conv {
                        input: input.clone(),
                        output,
                    },
                )
            }
            LayerSpec::MaxPool1d { pool_size } => {
                let channels = self.input_shape[1];
                let steps = self.output_shape[0];
                let x = input.data();
                let mut out = vec![0.0; steps * channels];
                let mut argmax = vec![0; steps * channels];
                for i in 0..steps {
                    for c in 0..channels {
                        let mut best = i * pool_size * channels + c;
                        for j in 1..pool_size {
                            let idx = (i * pool_size + j) * channels + c;
                            if x[idx] > x[best] {
                                best = idx;
                            }
                        }
                        out[i * channels + c] = x[best];
                        argmax[i * channels + c] = best;
                    }
                }
                (
                    Tensor::from_parts(self.output_shape.clone(), out),
                    Cache::Pool { argmax },
                )
            }
            LayerSpec::Flatten => (
                input.clone().reshaped(self.output_shape.clone()),
                Cache::Flatten,
            ),
            LayerSpec::Dense { units, activation } => {
                let width = self.input_shape[0];
                let weights = self.params[0].data();
                let bias = self.params[1].data();
                let x = input.data();
                let out: Vec<f64> = (0..units)
                    .map(|j| {
                        let w = &weights[j * width..][..width];
                        let dot: f64 = w.iter().zip(x).map(|(a, b)| a * b).sum();
                        activation.apply(bias[j] + dot)
                    })
                    .collect();
                let output = Tensor::from_parts(self.output_shape.clone(), out);
                (
                    output.clone(),
                    Cache::Dense {
                        input: input.clone(),
                        output,
                    },
                )
            }
            LayerSpec::Lstm {
                units,
                return_sequences,
            } => {
                let cache = lstm::forward(&self.params, input, units);
                let out = if return_sequences {
                    cache.hidden_sequence()
                } else {
                    cache.last_hidden()
                };
                (
                    Tensor::from_parts(self.output_shape.clone(), out),
                    Cache::Lstm(Box::new(cache)),
                )
            }
        })
    }

    /// Accumulates parameter gradients into `grads` and returns the gradient
    /// with respect to the layer input.
    pub fn backward(&self, cache: &Cache, grad_out: &Tensor, grads: &mut [Tensor]) -> Tensor {
        match (self.spec, cache) {
            (
                LayerSpec::Conv1d {
                    filters,
                    kernel_size,
                    activation,
                },
                Cache::Conv { input, output },
            ) => {
                let channels = self.input_shape[1];
                let weights = self.params[0].data();
                let x = input.data();
                let delta: Vec<f64> = grad_out
                    .data()
                    .iter()
                    .zip(output.data())
                    .map(|(g, y)| g * activation.derivative_from_output(*y))
                    .collect();
                let mut grad_in = vec![0.0; x.len()];
                let (gw, gb) = grads.split_at_mut(1);
                let gw = gw[0].data_mut();
                let gb = gb[0].data_mut();
                for (t, d) in delta.chunks_exact(filters).enumerate() {
                    for (b, dv) in gb.iter_mut().zip(d) {
                        *b += dv;
                    }
                    for k in 0..kernel_size {
                        for c in 0..channels {
                            let xi = (t + k) * channels + c;
                            let off = (k * channels + c) * filters;
                            let xv = x[xi];
                            let mut acc = 0.0;
                            for f in 0..filters {
                                gw[off + f] += d[f] * xv;
                                acc += d[f] * weights[off + f];
                            }
                            grad_in[xi] += acc;
                        }
                    }
                }
                Tensor::from_parts(self.input_shape.clone(), grad_in)
            }
            (LayerSpec::MaxPool1d { .. }, Cache::Pool { argmax }) => {
                let mut grad_in = vec![0.0; self.input_shape.iter().product()];
                for (g, &idx) in grad_out.data().iter().zip(argmax) {
                    grad_in[idx] += g;
                }
                Tensor::from_parts(self.input_shape.clone(), grad_in)
            }
            (LayerSpec::Flatten, Cache::Flatten) => {
                grad_out.clone().reshaped(self.input_shape.clone())
            }
            (LayerSpec::Dense { units, activation }, Cache::Dense { input, output }) => {
                let width = self.input_shape[0];
                let weights = self.params[0].data();
                let x = input.data();
                let mut grad_in = vec![0.0; width];
                let (gw, gb) = grads.split_at_mut(1);
                let gw = gw[0].data_mut();
                let gb = gb[0].data_mut();
                for j in 0..units {
                    let d =
                        grad_out.data()[j] * activation.derivative_from_output(output.data()[j]);
                    if d == 0.0 {
                        continue;
                    }
                    gb[j] += d;
                    let gw_row = &mut gw[j * width..][..width];
                    let w_row = &weights[j * width..][..width];
                    for i in 0..width {
                        gw_row[i] += d * x[i];
                        grad_in[i] += d * w_row[i];
                    }
                }
                Tensor::from_parts(self.input_shape.clone(), grad_in)
            }
            (
                LayerSpec::Lstm {
                    units,
                    return_sequences,
                },
                Cache::Lstm(cache),
            ) => {
                let grad_in = lstm::backward(
                    &self.params,
                    cache,
                    grad_out.data(),
                    units,
                    return_sequences,
                    grads,
                );
                Tensor::from_parts(self.input_shape.clone(), grad_in)
            }
            _ => unreachable!("cache does not belong to this layer"),
        }
    }
}
