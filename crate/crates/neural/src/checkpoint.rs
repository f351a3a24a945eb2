//! Structured-text (JSON) checkpoints: layer specs, shapes, parameters and
//! optimizer state. Floats are written in shortest round-trip form, so a
//! save → load cycle is bit-exact.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{NeuralError, Result};
use crate::layer::{Layer, LayerSpec};
use crate::network::Network;
use crate::optim::AdamState;
use crate::tensor::Tensor;

pub const CHECKPOINT_VERSION: u32 = 1;
const FORMAT: &str = "megazord-network";

#[derive(Serialize, Deserialize)]
struct LayerRecord {
    spec: LayerSpec,
    params: Vec<Tensor>,
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    format: String,
    version: u32,
    input_shape: Vec<usize>,
    layers: Vec<LayerRecord>,
    optimizer: AdamState,
}

pub fn save_checkpoint<W: Write>(network: &Network, writer: W) -> Result<()> {
    let record = Checkpoint {
        format: FORMAT.to_string(),
        version: CHECKPOINT_VERSION,
        input_shape: network.input_shape().to_vec(),
        layers: network
            .layers
            .iter()
            .map(|l| LayerRecord {
                spec: l.spec,
                params: l.params.clone(),
            })
            .collect(),
        optimizer: network.optimizer.clone(),
    };
    serde_json::to_writer_pretty(writer, &record)
        .map_err(|e| NeuralError::Checkpoint(e.to_string()))
}

pub fn load_checkpoint<R: Read>(reader: R) -> Result<Network> {
    let record: Checkpoint =
        serde_json::from_reader(reader).map_err(|e| NeuralError::Checkpoint(e.to_string()))?;
    if record.format != FORMAT {
        return Err(NeuralError::Checkpoint(format!(
            "unexpected format tag {:?}",
            record.format
        )));
    }
    if record.version != CHECKPOINT_VERSION {
        return Err(NeuralError::Checkpoint(format!(
            "unsupported checkpoint version {}",
            record.version
        )));
    }

    let mut shape = record.input_shape.clone();
    let mut layers = Vec::with_capacity(record.layers.len());
    for rec in record.layers {
        let output_shape = rec.spec.output_shape(&shape)?;
        for p in &rec.params {
            // Tensor's serde derive bypasses the constructor check.
            Tensor::new(p.shape().to_vec(), p.data().to_vec())?;
        }
        layers.push(Layer {
            spec: rec.spec,
            input_shape: shape,
            output_shape: output_shape.clone(),
            params: rec.params,
        });
        shape = output_shape;
    }
    let mut network = Network::from_layers(record.input_shape, layers);
    let expected: Vec<Vec<usize>> = network.parameters().map(|p| p.shape().to_vec()).collect();
    let fresh = network.optimizer.clone();
    let aligned = record.optimizer.first_moment.len() == fresh.first_moment.len()
        && record.optimizer.second_moment.len() == fresh.second_moment.len()
        && record
            .optimizer
            .first_moment
            .iter()
            .chain(&record.optimizer.second_moment)
            .zip(fresh.first_moment.iter().chain(&fresh.second_moment))
            .all(|(a, b)| a.len() == b.len());
    if !aligned {
        return Err(NeuralError::Checkpoint(format!(
            "optimizer state does not match parameter shapes {expected:?}"
        )));
    }
    network.optimizer = record.optimizer;
    Ok(network)
}
