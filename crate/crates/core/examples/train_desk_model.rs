//! Builds the desk-scale fault-robustness fixture: a 2-class synthetic
//! dataset and a small binary network fitted to it.
//!
//! Conv kernels are fixed (all-ones, all-zeros, seeded random) with per-channel
//! thresholds at the training-set median score; the classifier keeps, for
//! each class, the `TOP_K` pooled features whose firing frequency most
//! exceeds the other class's.
//!
//! Usage: cargo run --release -p skysim-core --example train_desk_model -- [OUT_DIR]

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use skysim_core::bnn::{
    BinaryTensor, BnnTopology, InputShape, LayerKind, LayerSpec, LayerWeights, Network, OracleBackend, PackedBits,
    WeightSet,
};
use skysim_core::dataset::{synthetic, SyntheticSpec};

const SEED: u64 = 20_240_601;
const TRAIN: usize = 600;
const TEST: usize = 200;
const TOP_K: usize = 48;

fn topology() -> BnnTopology {
    BnnTopology {
        name: "desk-2class".into(),
        note: "desk-scale fixture for fault sweeps".into(),
        input: InputShape { width: 32, height: 32, channels: 3 },
        layers: vec![
            LayerSpec::binconv(32, 32, 3, 8, 3, 3),
            LayerSpec::maxpool(16, 16, 8),
            LayerSpec::binconv(16, 16, 8, 8, 3, 3),
            LayerSpec::maxpool(8, 8, 8),
            LayerSpec::fully_conn(512, 2),
        ],
    }
}

fn conv_kernels(fan_in: usize, n: usize, rng: &mut ChaCha8Rng) -> Vec<PackedBits> {
    (0..n)
        .map(|o| match o {
            0 => PackedBits::from_bools(&vec![true; fan_in]),
            1 => PackedBits::zeros(fan_in),
            _ => PackedBits::from_bools(&(0..fan_in).map(|_| rng.gen()).collect::<Vec<_>>()),
        })
        .collect()
}

fn median_thresholds(scores: &[Vec<u32>], channels: usize) -> Vec<i32> {
    (0..channels)
        .map(|c| {
            let mut v: Vec<u32> = scores.iter().flat_map(|s| s.iter().skip(c).step_by(channels).copied()).collect();
            v.sort_unstable();
            v[v.len() / 2] as i32
        })
        .collect()
}

/// Runs the prefix of `net` that has real weights and returns the scores of
/// layer `layer` for every image.
fn layer_scores(net: &Network, data: &[(BinaryTensor, usize)], layer: usize) -> Vec<Vec<u32>> {
    data.iter()
        .map(|(img, _)| net.run(img, &mut OracleBackend, None).expect("fixture network runs").layers[layer].scores.clone())
        .collect()
}

fn accuracy(net: &Network, data: &[(BinaryTensor, usize)]) -> f64 {
    let right = data.iter().filter(|(img, label)| net.run(img, &mut OracleBackend, None).unwrap().class == *label).count();
    right as f64 / data.len() as f64
}

fn main() {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures/desk".into()));
    std::fs::create_dir_all(&out).expect("create output dir");

    let spec = SyntheticSpec::default();
    let train_set = synthetic(TRAIN, &spec, SEED);
    let test_set = synthetic(TEST, &spec, SEED + 1);
    let train = train_set.binarized();
    let test = test_set.binarized();

    let topo = topology();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    // placeholder weights; fitted layer by layer below
    let mut weights = WeightSet::random(&topo, &mut rng);
    for (i, spec) in topo.layers.iter().enumerate() {
        if spec.kind != LayerKind::BinConv {
            continue;
        }
        let kernels = conv_kernels(spec.fan_in(), spec.out_channels, &mut rng);
        weights.layers[i] = Some(LayerWeights { kernels, thresholds: vec![0; spec.out_channels] });
        let net = Network::new(topo.clone(), weights.clone()).expect("valid fixture");
        let scores = layer_scores(&net, &train, i);
        weights.layers[i].as_mut().unwrap().thresholds = median_thresholds(&scores, spec.out_channels);
    }

    let fc = topo.layers.len() - 1;
    let net = Network::new(topo.clone(), weights.clone()).expect("valid fixture");
    let features: Vec<PackedBits> = train
        .iter()
        .map(|(img, _)| {
            let trace = net.run(img, &mut OracleBackend, None).unwrap();
            trace.layers[fc - 1].output.clone().unwrap().into_bits()
        })
        .collect();
    let n = topo.layers[fc].in_channels;
    let classes = topo.num_classes();
    let mut freq = vec![vec![0.0f64; n]; classes];
    let mut count = vec![0usize; classes];
    for (f, (_, label)) in features.iter().zip(&train) {
        count[*label] += 1;
        for (j, bit) in f.iter().enumerate() {
            if bit {
                freq[*label][j] += 1.0;
            }
        }
    }
    for c in 0..classes {
        for v in &mut freq[c] {
            *v /= count[c].max(1) as f64;
        }
    }
    let kernels = (0..classes)
        .map(|c| {
            let mut gain: Vec<(f64, usize)> = (0..n)
                .map(|j| {
                    let other = (0..classes).filter(|&k| k != c).map(|k| freq[k][j]).sum::<f64>() / (classes - 1) as f64;
                    (freq[c][j] - other, j)
                })
                .collect();
            gain.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            let mut k = PackedBits::zeros(n);
            for &(_, j) in gain.iter().take(TOP_K) {
                k.set(j, true);
            }
            k
        })
        .collect();
    weights.layers[fc] = Some(LayerWeights { kernels, thresholds: vec![0; classes] });

    let net = Network::new(topo.clone(), weights.clone()).expect("valid fixture");
    let train_acc = accuracy(&net, &train);
    let test_acc = accuracy(&net, &test);
    println!("train accuracy {:.4}  test accuracy {:.4}", train_acc, test_acc);

    std::fs::write(out.join("topology.toml"), topo.to_toml_string()).expect("write topology");
    weights.save(&out.join("weights.smbw")).expect("write weights");
    test_set.save(&out.join("test.bin")).expect("write dataset");
    println!("wrote {}", out.display());
}
