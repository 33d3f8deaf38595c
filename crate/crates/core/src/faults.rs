//! Error injection into pre-threshold popcount values and accuracy sweeps.
//!
//! A "pixel" error perturbs one integer score `f` before its comparator, so
//! magnitudes up to ±30 have room to act.

use std::fmt::Write as _;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bnn::{BinaryTensor, BnnError, LayerKind, LayerSpec, Network, OracleBackend};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FaultError {
    #[error("invalid fault spec: {0}")]
    InvalidSpec(String),
    #[error("empty dataset")]
    EmptyDataset,
    #[error(transparent)]
    Bnn(#[from] BnnError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FaultTargets {
    /// Every BinConv layer in each inference.
    AllBinconv,
    /// Trial `t` hits only the `t mod L`-th BinConv layer.
    OneAtATime,
    /// Explicit layer indices (must be BinConv).
    Layers(Vec<usize>),
}

impl FaultTargets {
    pub fn label(&self) -> String {
        match self {
            FaultTargets::AllBinconv => "all-binconv".into(),
            FaultTargets::OneAtATime => "one-at-a-time".into(),
            FaultTargets::Layers(l) => {
                format!("layers-{}", l.iter().map(usize::to_string).collect::<Vec<_>>().join("+"))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultSpec {
    pub rate: f64,
    pub magnitude: u32,
    pub targets: FaultTargets,
    pub seed: u64,
}

impl FaultSpec {
    pub fn validate(&self) -> Result<(), FaultError> {
        if !(self.rate > 0.0 && self.rate <= 1.0) {
            return Err(FaultError::InvalidSpec(format!("rate {} outside (0, 1]", self.rate)));
        }
        if self.magnitude == 0 {
            return Err(FaultError::InvalidSpec("magnitude must be >= 1".into()));
        }
        Ok(())
    }

    /// Positions perturbed in a layer holding `count` values.
    pub fn perturbed_count(&self, count: usize) -> usize {
        ((self.rate * count as f64).round() as usize).min(count)
    }
}

/// One applied perturbation, for auditing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Perturbation {
    pub position: usize,
    pub delta: i32,
    pub before: u32,
    pub after: u32,
}

/// Perturbs exactly `round(rate·len)` distinct positions of `values` by a
/// uniform draw from `{−m..−1, +1..+m}`, clamped to `[0, n_bits]`.
pub fn inject<R: Rng + ?Sized>(values: &mut [u32], n_bits: u32, rate: f64, magnitude: u32, rng: &mut R) -> Vec<Perturbation> {
    let k = ((rate * values.len() as f64).round() as usize).min(values.len());
    let mut positions = sample(rng, values.len(), k).into_vec();
    positions.sort_unstable();
    let m = magnitude as i32;
    positions
        .into_iter()
        .map(|position| {
            let step = rng.gen_range(1..=m);
            let delta = if rng.gen::<bool>() { step } else { -step };
            let before = values[position];
            let after = (before as i64 + delta as i64).clamp(0, n_bits as i64) as u32;
            values[position] = after;
            Perturbation { position, delta, before, after }
        })
        .collect()
}

fn binconv_layers(net: &Network) -> Vec<usize> {
    net.topology.layers.iter().enumerate().filter(|(_, l)| l.kind == LayerKind::BinConv).map(|(i, _)| i).collect()
}

fn resolve_targets(net: &Network, targets: &FaultTargets) -> Result<Vec<usize>, FaultError> {
    let conv = binconv_layers(net);
    match targets {
        FaultTargets::AllBinconv | FaultTargets::OneAtATime => Ok(conv),
        FaultTargets::Layers(l) => {
            if let Some(bad) = l.iter().find(|i| !conv.contains(i)) {
                return Err(FaultError::InvalidSpec(format!("layer {bad} is not a BinConv layer")));
            }
            Ok(l.clone())
        }
    }
}

/// Classification error over `data` with faults in `layers`.
fn error_rate<R: Rng>(
    net: &Network,
    data: &[(BinaryTensor, usize)],
    layers: &[usize],
    spec: &FaultSpec,
    rng: &mut R,
) -> Result<f64, FaultError> {
    let mut wrong = 0usize;
    for (image, label) in data {
        let mut hook = |i: usize, l: &LayerSpec, scores: &mut [u32]| {
            if layers.contains(&i) {
                inject(scores, l.fan_in() as u32, spec.rate, spec.magnitude, rng);
            }
        };
        let trace = net.run(image, &mut OracleBackend, Some(&mut hook))?;
        wrong += usize::from(trace.class != *label);
    }
    Ok(wrong as f64 / data.len() as f64)
}

pub fn baseline_error(net: &Network, data: &[(BinaryTensor, usize)]) -> Result<f64, FaultError> {
    if data.is_empty() {
        return Err(FaultError::EmptyDataset);
    }
    let mut wrong = 0usize;
    for (image, label) in data {
        wrong += usize::from(net.run(image, &mut OracleBackend, None)?.class != *label);
    }
    Ok(wrong as f64 / data.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateResult {
    pub rate: f64,
    pub trial_errors: Vec<f64>,
}

impl RateResult {
    pub fn mean(&self) -> f64 {
        self.trial_errors.iter().sum::<f64>() / self.trial_errors.len() as f64
    }

    /// Sample standard deviation (0 for a single trial).
    pub fn stddev(&self) -> f64 {
        let n = self.trial_errors.len();
        if n < 2 {
            return 0.0;
        }
        let mean = self.mean();
        (self.trial_errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyReport {
    pub baseline_error: f64,
    pub rates: Vec<RateResult>,
    pub magnitude: u32,
    pub targets: FaultTargets,
    pub seed: u64,
    pub images: usize,
}

impl AccuracyReport {
    /// `rate,mean_error,stddev,trials`; the clean baseline is the rate-0 row.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# targets={} magnitude={} seed={} images={}",
            self.targets.label(),
            self.magnitude,
            self.seed,
            self.images
        );
        out.push_str("rate,mean_error,stddev,trials\n");
        let _ = writeln!(out, "0,{:.6},0.000000,1", self.baseline_error);
        for r in &self.rates {
            let _ = writeln!(out, "{},{:.6},{:.6},{}", r.rate, r.mean(), r.stddev(), r.trial_errors.len());
        }
        out
    }
}

/// Runs `trials` seeded fault trials per rate on the oracle engine.
///
/// Trial `t` of rate `r` draws from its own ChaCha stream `(r << 32) | t`, so
/// results do not depend on thread scheduling.
pub fn accuracy_sweep(
    net: &Network,
    data: &[(BinaryTensor, usize)],
    rates: &[f64],
    template: &FaultSpec,
    trials: usize,
) -> Result<AccuracyReport, FaultError> {
    if trials == 0 {
        return Err(FaultError::InvalidSpec("trials must be > 0".into()));
    }
    for &rate in rates {
        FaultSpec { rate, ..template.clone() }.validate()?;
    }
    let layers = resolve_targets(net, &template.targets)?;
    let baseline = baseline_error(net, data)?;

    let mut results = Vec::with_capacity(rates.len());
    for (ri, &rate) in rates.iter().enumerate() {
        let spec = FaultSpec { rate, ..template.clone() };
        let trial_errors = (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
                rng.set_stream(((ri as u64) << 32) | t as u64);
                let hit = match spec.targets {
                    FaultTargets::OneAtATime if !layers.is_empty() => vec![layers[t % layers.len()]],
                    _ => layers.clone(),
                };
                error_rate(net, data, &hit, &spec, &mut rng)
            })
            .collect::<Result<Vec<_>, _>>()?;
        results.push(RateResult { rate, trial_errors });
    }
    Ok(AccuracyReport {
        baseline_error: baseline,
        rates: results,
        magnitude: template.magnitude,
        targets: template.targets.clone(),
        seed: template.seed,
        images: data.len(),
    })
}
