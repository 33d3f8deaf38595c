use std::ops::AddAssign;

use super::topology::{BnnTopology, LayerKind, LayerSpec};

/// Primitive operation counts for one layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OpCounts {
    pub xor: u64,
    pub or: u64,
    pub and: u64,
    pub popcounts: u64,
    /// Bits summed by each popcount (0 when there are none).
    pub popcount_bits: u64,
    pub comparators: u64,
}

impl OpCounts {
    pub fn logic_ops(&self) -> u64 {
        self.xor + self.or + self.and
    }
}

impl AddAssign for OpCounts {
    /// Sums counts; `popcount_bits` keeps the larger width since it is a
    /// per-popcount attribute rather than a total.
    fn add_assign(&mut self, rhs: Self) {
        self.xor += rhs.xor;
        self.or += rhs.or;
        self.and += rhs.and;
        self.popcounts += rhs.popcounts;
        self.popcount_bits = self.popcount_bits.max(rhs.popcount_bits);
        self.comparators += rhs.comparators;
    }
}

pub fn layer_op_counts(spec: &LayerSpec) -> OpCounts {
    let (w, h) = (spec.width as u64, spec.height as u64);
    let (inf, outf) = (spec.in_channels as u64, spec.out_channels as u64);
    match spec.kind {
        LayerKind::BinConv => {
            let (kw, kh) = (spec.kernel_w as u64, spec.kernel_h as u64);
            OpCounts {
                xor: kw * kh * outf * w * h * inf,
                popcounts: w * h * outf,
                popcount_bits: kw * kh * inf,
                comparators: w * h * outf,
                ..OpCounts::default()
            }
        }
        // three 2-input ORs reduce each 2×2 window
        LayerKind::Maxpool => OpCounts { or: 3 * w * h * outf, ..OpCounts::default() },
        LayerKind::FullyConn => OpCounts {
            and: inf * outf,
            popcounts: outf,
            popcount_bits: inf,
            comparators: outf,
            ..OpCounts::default()
        },
    }
}

pub fn op_counts(topo: &BnnTopology) -> Vec<OpCounts> {
    topo.layers.iter().map(layer_op_counts).collect()
}
