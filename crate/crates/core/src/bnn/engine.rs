//! Layer kernels and inference over two interchangeable backends.
//!
//! [`OracleBackend`] is plain integer arithmetic on packed bits.
//! [`SimcBackend`] sends every XOR/OR/AND through a [`SimcArray`] and every
//! popcount and threshold comparison through the SOT-MTJ peripherals.

use crate::array::{ArrayParams, ArrayStats, Gate, SimcArray};
use crate::device::DeviceModel;
use crate::peripherals::{PopcountParams, PopcountUnit};

use super::tensor::{BinaryTensor, PackedBits};
use super::topology::{BnnTopology, LayerKind, LayerSpec};
use super::weights::{LayerWeights, WeightSet};
use super::BnnError;

pub trait Backend {
    /// Pre-threshold match counts `f`, indexed like the output tensor.
    fn binconv_scores(&mut self, input: &BinaryTensor, spec: &LayerSpec, w: &LayerWeights) -> Result<Vec<u32>, BnnError>;
    fn maxpool(&mut self, input: &BinaryTensor) -> Result<BinaryTensor, BnnError>;
    /// `popcount(input AND kernel_o)` per output.
    fn fullyconn_scores(&mut self, input: &PackedBits, w: &LayerWeights) -> Result<Vec<u32>, BnnError>;
    /// `score >= threshold[channel]`, channel being `index % thresholds.len()`.
    fn threshold(&mut self, scores: &[u32], thresholds: &[i32]) -> Result<PackedBits, BnnError>;
}

fn check_conv(input: &BinaryTensor, spec: &LayerSpec, w: &LayerWeights) -> Result<(), BnnError> {
    if spec.kind != LayerKind::BinConv {
        return Err(BnnError::ShapeMismatch(format!("expected a BinConv spec, got {}", spec.kind)));
    }
    if input.shape() != spec.input_shape() {
        return Err(BnnError::ShapeMismatch(format!("input {:?} vs layer {:?}", input.shape(), spec.input_shape())));
    }
    if w.kernels.len() != spec.out_channels || w.kernels.iter().any(|k| k.len() != spec.fan_in()) {
        return Err(BnnError::ShapeMismatch("kernel shape does not match layer".into()));
    }
    Ok(())
}

fn check_pool(input: &BinaryTensor) -> Result<(), BnnError> {
    if !input.width().is_multiple_of(2) || !input.height().is_multiple_of(2) {
        return Err(BnnError::OddDimensions { width: input.width(), height: input.height() });
    }
    Ok(())
}

fn check_fc(input: &PackedBits, w: &LayerWeights) -> Result<(), BnnError> {
    if w.kernels.iter().any(|k| k.len() != input.len()) {
        return Err(BnnError::ShapeMismatch(format!("FullyConn input has {} bits", input.len())));
    }
    Ok(())
}

/// Receptive field of output pixel (x, y), ordered (ky, kx, c), zero padded.
fn conv_window(input: &BinaryTensor, spec: &LayerSpec, x: usize, y: usize) -> PackedBits {
    let mut window = PackedBits::zeros(spec.fan_in());
    let (ox, oy) = ((spec.kernel_w / 2) as isize, (spec.kernel_h / 2) as isize);
    let mut j = 0;
    for ky in 0..spec.kernel_h {
        for kx in 0..spec.kernel_w {
            let sx = x as isize + kx as isize - ox;
            let sy = y as isize + ky as isize - oy;
            for c in 0..spec.in_channels {
                if input.get_padded(sx, sy, c) {
                    window.set(j, true);
                }
                j += 1;
            }
        }
    }
    window
}

#[derive(Debug, Clone, Copy, Default)]
pub struct OracleBackend;

impl Backend for OracleBackend {
    fn binconv_scores(&mut self, input: &BinaryTensor, spec: &LayerSpec, w: &LayerWeights) -> Result<Vec<u32>, BnnError> {
        check_conv(input, spec, w)?;
        let n = spec.fan_in();
        let mut scores = Vec::with_capacity(spec.width * spec.height * spec.out_channels);
        for y in 0..spec.height {
            for x in 0..spec.width {
                let window = conv_window(input, spec, x, y);
                scores.extend(w.kernels.iter().map(|k| (n - window.xor_count(k)) as u32));
            }
        }
        Ok(scores)
    }

    fn maxpool(&mut self, input: &BinaryTensor) -> Result<BinaryTensor, BnnError> {
        check_pool(input)?;
        Ok(BinaryTensor::from_fn(input.width() / 2, input.height() / 2, input.channels(), |x, y, c| {
            input.get(2 * x, 2 * y, c)
                | input.get(2 * x + 1, 2 * y, c)
                | input.get(2 * x, 2 * y + 1, c)
                | input.get(2 * x + 1, 2 * y + 1, c)
        }))
    }

    fn fullyconn_scores(&mut self, input: &PackedBits, w: &LayerWeights) -> Result<Vec<u32>, BnnError> {
        check_fc(input, w)?;
        Ok(w.kernels.iter().map(|k| input.and_count(k) as u32).collect())
    }

    fn threshold(&mut self, scores: &[u32], thresholds: &[i32]) -> Result<PackedBits, BnnError> {
        let n = thresholds.len();
        let mut out = PackedBits::zeros(scores.len());
        for (i, &s) in scores.iter().enumerate() {
            if s as i64 >= thresholds[i % n] as i64 {
                out.set(i, true);
            }
        }
        Ok(out)
    }
}

/// Hardware-routed backend: one in-memory array plus one popcount unit.
#[derive(Debug, Clone)]
pub struct SimcBackend {
    array: SimcArray,
    popcount: PopcountUnit,
}

impl SimcBackend {
    pub fn new(array: ArrayParams, device: DeviceModel, popcount: PopcountParams) -> Result<Self, BnnError> {
        Ok(Self { array: SimcArray::new(array, device)?, popcount: PopcountUnit::new(popcount.block_bits)? })
    }

    pub fn with_defaults() -> Self {
        Self::new(ArrayParams::default(), DeviceModel::default(), PopcountParams::default()).expect("default parameters are valid")
    }

    pub fn array_stats(&self) -> ArrayStats {
        self.array.stats()
    }

    pub fn popcount_blocks(&self) -> u64 {
        self.popcount.blocks_used()
    }

    pub fn comparisons(&self) -> u64 {
        self.popcount.comparisons()
    }
}

impl Backend for SimcBackend {
    fn binconv_scores(&mut self, input: &BinaryTensor, spec: &LayerSpec, w: &LayerWeights) -> Result<Vec<u32>, BnnError> {
        check_conv(input, spec, w)?;
        let n = spec.fan_in();
        let mut scores = Vec::with_capacity(spec.width * spec.height * spec.out_channels);
        let mut pairs = Vec::with_capacity(n * spec.out_channels);
        for y in 0..spec.height {
            for x in 0..spec.width {
                let window = conv_window(input, spec, x, y);
                pairs.clear();
                for k in &w.kernels {
                    pairs.extend(window.iter().zip(k.iter()));
                }
                let mismatch = self.array.execute(Gate::Xor, &pairs)?;
                for bits in mismatch.chunks(n) {
                    let mismatches = self.popcount.count(bits)?;
                    scores.push((n - mismatches) as u32);
                }
            }
        }
        Ok(scores)
    }

    fn maxpool(&mut self, input: &BinaryTensor) -> Result<BinaryTensor, BnnError> {
        check_pool(input)?;
        let (w, h, ch) = (input.width() / 2, input.height() / 2, input.channels());
        let mut first = Vec::with_capacity(2 * w * h * ch);
        for y in 0..h {
            for x in 0..w {
                for c in 0..ch {
                    first.push((input.get(2 * x, 2 * y, c), input.get(2 * x + 1, 2 * y, c)));
                    first.push((input.get(2 * x, 2 * y + 1, c), input.get(2 * x + 1, 2 * y + 1, c)));
                }
            }
        }
        let partial = self.array.execute(Gate::Or, &first)?;
        let second: Vec<(bool, bool)> = partial.chunks(2).map(|p| (p[0], p[1])).collect();
        let pooled = self.array.execute(Gate::Or, &second)?;
        Ok(BinaryTensor::from_bits(w, h, ch, PackedBits::from_bools(&pooled)))
    }

    fn fullyconn_scores(&mut self, input: &PackedBits, w: &LayerWeights) -> Result<Vec<u32>, BnnError> {
        check_fc(input, w)?;
        let n = input.len();
        let mut pairs = Vec::with_capacity(n * w.kernels.len());
        for k in &w.kernels {
            pairs.extend(input.iter().zip(k.iter()));
        }
        let anded = self.array.execute(Gate::And, &pairs)?;
        anded.chunks(n.max(1)).map(|bits| Ok(self.popcount.count(bits)? as u32)).collect()
    }

    fn threshold(&mut self, scores: &[u32], thresholds: &[i32]) -> Result<PackedBits, BnnError> {
        let n = thresholds.len();
        let mut out = PackedBits::zeros(scores.len());
        for (i, &s) in scores.iter().enumerate() {
            // thresholds are validated non-negative
            if self.popcount.compare(s as usize, thresholds[i % n].max(0) as usize)? {
                out.set(i, true);
            }
        }
        Ok(out)
    }
}

pub fn binconv_layer(
    backend: &mut dyn Backend,
    input: &BinaryTensor,
    spec: &LayerSpec,
    w: &LayerWeights,
) -> Result<BinaryTensor, BnnError> {
    let scores = backend.binconv_scores(input, spec, w)?;
    let bits = backend.threshold(&scores, &w.thresholds)?;
    Ok(BinaryTensor::from_bits(spec.width, spec.height, spec.out_channels, bits))
}

pub fn maxpool_layer(backend: &mut dyn Backend, input: &BinaryTensor) -> Result<BinaryTensor, BnnError> {
    backend.maxpool(input)
}

pub fn fullyconn_layer(backend: &mut dyn Backend, input: &PackedBits, spec: &LayerSpec, w: &LayerWeights) -> Result<PackedBits, BnnError> {
    if input.len() != spec.in_channels {
        return Err(BnnError::ShapeMismatch(format!("FullyConn expects {} inputs, got {}", spec.in_channels, input.len())));
    }
    let scores = backend.fullyconn_scores(input, w)?;
    backend.threshold(&scores, &w.thresholds)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Engine {
    Oracle,
    Simc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerTrace {
    pub kind: LayerKind,
    /// Pre-threshold values `f` (empty for Maxpool).
    pub scores: Vec<u32>,
    /// Thresholded output; `None` for the final classifier layer.
    pub output: Option<BinaryTensor>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InferenceTrace {
    pub layers: Vec<LayerTrace>,
    pub class: usize,
}

impl InferenceTrace {
    pub fn final_scores(&self) -> &[u32] {
        self.layers.last().map_or(&[], |l| &l.scores)
    }

    /// First layer at which two traces differ.
    pub fn first_divergence(&self, other: &InferenceTrace) -> Option<usize> {
        let n = self.layers.len().max(other.layers.len());
        (0..n).find(|&i| self.layers.get(i) != other.layers.get(i))
    }
}

/// Lowest index among the maximal scores.
pub fn argmax(scores: &[u32]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

/// Called with (layer index, layer spec, pre-threshold scores) before each
/// thresholding or classification step.
pub type ScoreHook<'a> = dyn FnMut(usize, &LayerSpec, &mut [u32]) + 'a;

#[derive(Debug, Clone)]
pub struct Network {
    pub topology: BnnTopology,
    pub weights: WeightSet,
}

impl Network {
    pub fn new(topology: BnnTopology, weights: WeightSet) -> Result<Self, BnnError> {
        topology.validate()?;
        weights.validate(&topology)?;
        Ok(Self { topology, weights })
    }

    pub fn run(&self, image: &BinaryTensor, backend: &mut dyn Backend, hook: Option<&mut ScoreHook<'_>>) -> Result<InferenceTrace, BnnError> {
        let mut hook = hook;
        let input = self.topology.input;
        if image.shape() != (input.width, input.height, input.channels) {
            return Err(BnnError::ShapeMismatch(format!(
                "image {:?} vs network input {:?}",
                image.shape(),
                (input.width, input.height, input.channels)
            )));
        }
        let last = self.topology.layers.len().saturating_sub(1);
        let mut current = image.clone();
        let mut layers = Vec::with_capacity(self.topology.layers.len());
        for (i, (spec, w)) in self.topology.layers.iter().zip(&self.weights.layers).enumerate() {
            let trace = match (spec.kind, w) {
                (LayerKind::Maxpool, _) => LayerTrace { kind: spec.kind, scores: Vec::new(), output: Some(backend.maxpool(&current)?) },
                (LayerKind::BinConv, Some(w)) => {
                    let mut scores = backend.binconv_scores(&current, spec, w)?;
                    if let Some(h) = hook.as_deref_mut() {
                        h(i, spec, &mut scores);
                    }
                    let bits = backend.threshold(&scores, &w.thresholds)?;
                    let out = BinaryTensor::from_bits(spec.width, spec.height, spec.out_channels, bits);
                    LayerTrace { kind: spec.kind, scores, output: Some(out) }
                }
                (LayerKind::FullyConn, Some(w)) => {
                    let mut scores = backend.fullyconn_scores(current.bits(), w)?;
                    if let Some(h) = hook.as_deref_mut() {
                        h(i, spec, &mut scores);
                    }
                    let output = if i == last {
                        None
                    } else {
                        Some(BinaryTensor::from_bits(1, 1, spec.out_channels, backend.threshold(&scores, &w.thresholds)?))
                    };
                    LayerTrace { kind: spec.kind, scores, output }
                }
                (_, None) => return Err(BnnError::ShapeMismatch(format!("layer {i}: missing weights"))),
            };
            if let Some(out) = &trace.output {
                current = out.clone();
            }
            layers.push(trace);
        }
        let class = layers.last().map_or(0, |l| argmax(&l.scores));
        Ok(InferenceTrace { layers, class })
    }

    pub fn infer(&self, image: &BinaryTensor, engine: Engine) -> Result<usize, BnnError> {
        match engine {
            Engine::Oracle => Ok(self.run(image, &mut OracleBackend, None)?.class),
            Engine::Simc => Ok(self.run(image, &mut SimcBackend::with_defaults(), None)?.class),
        }
    }
}
