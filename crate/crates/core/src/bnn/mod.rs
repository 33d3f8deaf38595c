//! Binary neural network mapping: BinConv runs on XOR + mismatch popcount,
//! Maxpool on OR, FullyConn on AND + popcount.

mod engine;
mod ops;
mod tensor;
mod topology;
mod weights;

use thiserror::Error;

use crate::array::ArrayError;
use crate::peripherals::PeripheralError;

pub use engine::{
    argmax, binconv_layer, fullyconn_layer, maxpool_layer, Backend, Engine, InferenceTrace, LayerTrace, Network,
    OracleBackend, ScoreHook, SimcBackend,
};
pub use ops::{layer_op_counts, op_counts, OpCounts};
pub use tensor::{BinaryTensor, PackedBits};
pub use topology::{BnnTopology, InputShape, LayerKind, LayerSpec};
pub use weights::{LayerWeights, WeightSet};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BnnError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("maxpool needs even dimensions, got {width}x{height}")]
    OddDimensions { width: usize, height: usize },
    #[error("invalid layer: {0}")]
    InvalidLayer(String),
    #[error("invalid topology: {0}")]
    InvalidTopology(String),
    #[error("layer {layer} channel {channel}: threshold {value} outside [0, {max}]")]
    ThresholdOutOfRange { layer: usize, channel: usize, value: i32, max: usize },
    #[error("weight file error at offset {offset}: {msg}")]
    WeightFormat { offset: usize, msg: String },
    #[error("topology parse error: {0}")]
    Parse(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Array(#[from] ArrayError),
    #[error(transparent)]
    Peripheral(#[from] PeripheralError),
}
