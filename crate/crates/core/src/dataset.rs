//! CIFAR-10 binary records and a seeded synthetic generator in the same
//! format.
//!
//! A record is 3073 bytes: one label byte, then 1024 red, 1024 green and
//! 1024 blue bytes, each plane row-major over 32×32.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::bnn::BinaryTensor;

pub const SIDE: usize = 32;
pub const PLANE: usize = SIDE * SIDE;
pub const RECORD_BYTES: usize = 1 + 3 * PLANE;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DatasetError {
    #[error("dataset length {len} is not a multiple of {RECORD_BYTES}-byte records")]
    Truncated { len: usize },
    #[error("record {index}: label {label} outside 0..{classes}")]
    BadLabel { index: usize, label: u8, classes: usize },
    #[error("{0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub label: u8,
    /// Planar R, G, B bytes.
    pub pixels: Vec<u8>,
}

impl Record {
    /// HWC tensor, pixel bit set when the byte is ≥ 128.
    pub fn binarize(&self) -> BinaryTensor {
        BinaryTensor::from_fn(SIDE, SIDE, 3, |x, y, c| self.pixels[c * PLANE + y * SIDE + x] >= 128)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Dataset {
    pub records: Vec<Record>,
}

impl Dataset {
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, DatasetError> {
        if !bytes.len().is_multiple_of(RECORD_BYTES) {
            return Err(DatasetError::Truncated { len: bytes.len() });
        }
        let records = bytes
            .chunks_exact(RECORD_BYTES)
            .map(|r| Record { label: r[0], pixels: r[1..].to_vec() })
            .collect();
        Ok(Self { records })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.records.len() * RECORD_BYTES);
        for r in &self.records {
            out.push(r.label);
            out.extend_from_slice(&r.pixels);
        }
        out
    }

    pub fn load(path: &Path) -> Result<Self, DatasetError> {
        let bytes = std::fs::read(path).map_err(|e| DatasetError::Io(format!("{}: {e}", path.display())))?;
        Self::from_bytes(&bytes).map_err(|e| match e {
            DatasetError::Truncated { len } => {
                DatasetError::Io(format!("{}: {len} bytes is not a whole number of {RECORD_BYTES}-byte records", path.display()))
            }
            other => other,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), DatasetError> {
        std::fs::write(path, self.to_bytes()).map_err(|e| DatasetError::Io(format!("{}: {e}", path.display())))
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn check_labels(&self, classes: usize) -> Result<(), DatasetError> {
        match self.records.iter().enumerate().find(|(_, r)| r.label as usize >= classes) {
            Some((index, r)) => Err(DatasetError::BadLabel { index, label: r.label, classes }),
            None => Ok(()),
        }
    }

    pub fn binarized(&self) -> Vec<(BinaryTensor, usize)> {
        self.records.iter().map(|r| (r.binarize(), r.label as usize)).collect()
    }
}

/// Class `k` of `classes` lights the `k`-th vertical band with a per-image
/// random tint; `noise` is the chance each byte lands on the wrong side of
/// 128, and `jitter` shifts band edges by up to that many pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub classes: usize,
    pub noise: f64,
    pub jitter: usize,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self { classes: 2, noise: 0.40, jitter: 3 }
    }
}

pub fn synthetic(n: usize, spec: &SyntheticSpec, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let classes = spec.classes.max(1);
    let band = SIDE / classes;
    let records = (0..n)
        .map(|_| {
            let label = rng.gen_range(0..classes);
            let j = spec.jitter as isize;
            let lo = (label * band) as isize + rng.gen_range(-j..=j);
            let hi = ((label + 1) * band) as isize + rng.gen_range(-j..=j);
            // at least one channel carries the band
            let mut tint = [rng.gen::<bool>(), rng.gen::<bool>(), rng.gen::<bool>()];
            if !tint.iter().any(|&t| t) {
                tint[rng.gen_range(0..3)] = true;
            }
            let mut pixels = vec![0u8; 3 * PLANE];
            for (c, &lit) in tint.iter().enumerate() {
                for y in 0..SIDE {
                    for x in 0..SIDE {
                        let inside = lit && (x as isize) >= lo && (x as isize) < hi;
                        let bright = inside != rng.gen_bool(spec.noise);
                        pixels[c * PLANE + y * SIDE + x] =
                            if bright { rng.gen_range(128..=255) } else { rng.gen_range(0..128) };
                    }
                }
            }
            Record { label: label as u8, pixels }
        })
        .collect();
    Dataset { records }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_layout() {
        let mut pixels = vec![0u8; 3 * PLANE];
        pixels[2 * PLANE + 5 * SIDE + 7] = 200; // blue (7, 5)
        pixels[3] = 127;
        let r = Record { label: 4, pixels };
        let t = r.binarize();
        assert!(t.get(7, 5, 2));
        assert!(!t.get(3, 0, 0));
        assert_eq!(t.bits().count_ones(), 1);
    }

    #[test]
    fn byte_round_trip_and_truncation() {
        let d = synthetic(5, &SyntheticSpec::default(), 1);
        let bytes = d.to_bytes();
        assert_eq!(bytes.len(), 5 * RECORD_BYTES);
        assert_eq!(Dataset::from_bytes(&bytes).unwrap(), d);
        assert!(matches!(Dataset::from_bytes(&bytes[..100]), Err(DatasetError::Truncated { len: 100 })));
    }

    #[test]
    fn synthetic_is_seeded() {
        let s = SyntheticSpec::default();
        assert_eq!(synthetic(8, &s, 3), synthetic(8, &s, 3));
        assert_ne!(synthetic(8, &s, 3), synthetic(8, &s, 4));
        assert!(synthetic(50, &s, 3).check_labels(2).is_ok());
        assert!(synthetic(50, &SyntheticSpec { classes: 10, ..s }, 3).check_labels(2).is_err());
    }
}
