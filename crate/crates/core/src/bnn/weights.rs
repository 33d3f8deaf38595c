//! Binary weight sets and the packed `SMBW` weight file.
//!
//! Layout (little-endian):
//!
//! ```text
//! "SMBW"            4-byte magic
//! version: u32      currently 1
//! for each BinConv / FullyConn layer, in topology order:
//!     kernels       out_channels × fan_in bits, row-major (o, ky, kx, c),
//!                   packed LSB-first, padded to a byte boundary
//!     thresholds    out_channels × i32
//! ```
//!
//! There is no per-layer header; the topology determines every size.

use std::path::Path;

use rand::Rng;

use super::tensor::PackedBits;
use super::topology::{BnnTopology, LayerKind};
use super::BnnError;

pub const MAGIC: &[u8; 4] = b"SMBW";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerWeights {
    /// One kernel per output channel, `fan_in` bits each.
    pub kernels: Vec<PackedBits>,
    pub thresholds: Vec<i32>,
}

/// Weights aligned with topology layers; `None` for Maxpool.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightSet {
    pub layers: Vec<Option<LayerWeights>>,
}

impl WeightSet {
    pub fn validate(&self, topo: &BnnTopology) -> Result<(), BnnError> {
        if self.layers.len() != topo.layers.len() {
            return Err(BnnError::ShapeMismatch(format!(
                "{} weight entries for {} layers",
                self.layers.len(),
                topo.layers.len()
            )));
        }
        for (i, (spec, w)) in topo.layers.iter().zip(&self.layers).enumerate() {
            match (spec.has_weights(), w) {
                (false, None) => {}
                (false, Some(_)) => return Err(BnnError::ShapeMismatch(format!("layer {i}: Maxpool has no weights"))),
                (true, None) => return Err(BnnError::ShapeMismatch(format!("layer {i}: missing weights"))),
                (true, Some(w)) => {
                    let fan_in = spec.fan_in();
                    if w.kernels.len() != spec.out_channels || w.thresholds.len() != spec.out_channels {
                        return Err(BnnError::ShapeMismatch(format!(
                            "layer {i}: expected {} kernels/thresholds, got {}/{}",
                            spec.out_channels,
                            w.kernels.len(),
                            w.thresholds.len()
                        )));
                    }
                    if let Some(k) = w.kernels.iter().find(|k| k.len() != fan_in) {
                        return Err(BnnError::ShapeMismatch(format!(
                            "layer {i}: kernel has {} bits, expected {fan_in}",
                            k.len()
                        )));
                    }
                    if let Some((o, &t)) = w.thresholds.iter().enumerate().find(|(_, &t)| t < 0 || t as usize > fan_in) {
                        return Err(BnnError::ThresholdOutOfRange { layer: i, channel: o, value: t, max: fan_in });
                    }
                }
            }
        }
        Ok(())
    }

    /// Uniformly random kernels with thresholds drawn from `[0, fan_in]`.
    pub fn random<R: Rng + ?Sized>(topo: &BnnTopology, rng: &mut R) -> Self {
        let layers = topo
            .layers
            .iter()
            .map(|spec| {
                spec.has_weights().then(|| {
                    let fan_in = spec.fan_in();
                    let kernels = (0..spec.out_channels)
                        .map(|_| PackedBits::from_bools(&(0..fan_in).map(|_| rng.gen::<bool>()).collect::<Vec<_>>()))
                        .collect();
                    let thresholds = (0..spec.out_channels).map(|_| rng.gen_range(0..=fan_in as i32)).collect();
                    LayerWeights { kernels, thresholds }
                })
            })
            .collect();
        Self { layers }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        for w in self.layers.iter().flatten() {
            let fan_in = w.kernels.first().map_or(0, PackedBits::len);
            let mut stream = PackedBits::zeros(fan_in * w.kernels.len());
            for (o, k) in w.kernels.iter().enumerate() {
                for (j, bit) in k.iter().enumerate() {
                    if bit {
                        stream.set(o * fan_in + j, true);
                    }
                }
            }
            out.extend_from_slice(&stream.to_bytes());
            for t in &w.thresholds {
                out.extend_from_slice(&t.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8], topo: &BnnTopology) -> Result<Self, BnnError> {
        let mut cursor = 0usize;
        let mut take = |n: usize| -> Result<(usize, &[u8]), BnnError> {
            let start = cursor;
            let end = start + n;
            if end > bytes.len() {
                return Err(BnnError::WeightFormat { offset: start, msg: format!("truncated: need {n} more bytes") });
            }
            cursor = end;
            Ok((start, &bytes[start..end]))
        };
        let (_, magic) = take(4)?;
        if magic != MAGIC {
            return Err(BnnError::WeightFormat { offset: 0, msg: format!("bad magic {magic:?}, expected \"SMBW\"") });
        }
        let (off, v) = take(4)?;
        let version = u32::from_le_bytes(v.try_into().expect("4 bytes"));
        if version != VERSION {
            return Err(BnnError::WeightFormat { offset: off, msg: format!("unsupported version {version}") });
        }
        let mut layers = Vec::with_capacity(topo.layers.len());
        for (i, spec) in topo.layers.iter().enumerate() {
            if spec.kind == LayerKind::Maxpool {
                layers.push(None);
                continue;
            }
            let fan_in = spec.fan_in();
            let n_bits = fan_in * spec.out_channels;
            let (_, raw) = take(n_bits.div_ceil(8))?;
            let stream = PackedBits::from_bytes(raw, n_bits);
            let kernels = (0..spec.out_channels)
                .map(|o| PackedBits::from_bools(&(0..fan_in).map(|j| stream.get(o * fan_in + j)).collect::<Vec<_>>()))
                .collect();
            let mut thresholds = Vec::with_capacity(spec.out_channels);
            for o in 0..spec.out_channels {
                let (off, raw) = take(4)?;
                let t = i32::from_le_bytes(raw.try_into().expect("4 bytes"));
                if t < 0 || t as usize > fan_in {
                    return Err(BnnError::WeightFormat {
                        offset: off,
                        msg: format!("layer {i} channel {o}: threshold {t} outside [0, {fan_in}]"),
                    });
                }
                thresholds.push(t);
            }
            layers.push(Some(LayerWeights { kernels, thresholds }));
        }
        if cursor != bytes.len() {
            return Err(BnnError::WeightFormat {
                offset: cursor,
                msg: format!("{} trailing bytes after last layer", bytes.len() - cursor),
            });
        }
        Ok(Self { layers })
    }

    pub fn load(path: &Path, topo: &BnnTopology) -> Result<Self, BnnError> {
        let bytes = std::fs::read(path).map_err(|e| BnnError::Io(format!("{}: {e}", path.display())))?;
        Self::from_bytes(&bytes, topo)
    }

    pub fn save(&self, path: &Path) -> Result<(), BnnError> {
        std::fs::write(path, self.to_bytes()).map_err(|e| BnnError::Io(format!("{}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bnn::topology::{InputShape, LayerSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small() -> BnnTopology {
        BnnTopology::new(
            InputShape { width: 4, height: 4, channels: 3 },
            vec![LayerSpec::binconv(4, 4, 3, 5, 3, 3), LayerSpec::maxpool(2, 2, 5), LayerSpec::fully_conn(20, 3)],
        )
    }

    #[test]
    fn file_round_trip() {
        let topo = small();
        let w = WeightSet::random(&topo, &mut ChaCha8Rng::seed_from_u64(1));
        w.validate(&topo).unwrap();
        let bytes = w.to_bytes();
        assert_eq!(&bytes[..4], b"SMBW");
        // 4 + 4 + ceil(5·27/8) + 5·4 + ceil(3·20/8) + 3·4
        assert_eq!(bytes.len(), 8 + 17 + 20 + 8 + 12);
        assert_eq!(WeightSet::from_bytes(&bytes, &topo).unwrap(), w);
    }

    #[test]
    fn corrupt_magic_names_offset() {
        let topo = small();
        let mut bytes = WeightSet::random(&topo, &mut ChaCha8Rng::seed_from_u64(2)).to_bytes();
        bytes[1] = b'X';
        let err = WeightSet::from_bytes(&bytes, &topo).unwrap_err();
        assert!(matches!(err, BnnError::WeightFormat { offset: 0, .. }));
        assert!(err.to_string().contains("offset 0"));
    }

    #[test]
    fn truncation_and_trailing_bytes() {
        let topo = small();
        let bytes = WeightSet::random(&topo, &mut ChaCha8Rng::seed_from_u64(3)).to_bytes();
        let err = WeightSet::from_bytes(&bytes[..bytes.len() - 1], &topo).unwrap_err();
        assert!(matches!(err, BnnError::WeightFormat { offset, .. } if offset == bytes.len() - 4));
        let mut longer = bytes.clone();
        longer.push(0);
        assert!(matches!(
            WeightSet::from_bytes(&longer, &topo),
            Err(BnnError::WeightFormat { offset, .. }) if offset == bytes.len()
        ));
    }

    #[test]
    fn threshold_range_enforced() {
        let topo = small();
        let mut w = WeightSet::random(&topo, &mut ChaCha8Rng::seed_from_u64(4));
        w.layers[0].as_mut().unwrap().thresholds[0] = 28;
        assert!(matches!(w.validate(&topo), Err(BnnError::ThresholdOutOfRange { layer: 0, .. })));
        assert!(WeightSet::from_bytes(&w.to_bytes(), &topo).is_err());
    }
}
