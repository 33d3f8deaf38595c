use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::BnnError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayerKind {
    BinConv,
    Maxpool,
    FullyConn,
}

impl fmt::Display for LayerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LayerKind::BinConv => "BinConv",
            LayerKind::Maxpool => "Maxpool",
            LayerKind::FullyConn => "FullyConn",
        })
    }
}

/// One layer of a binary network.
///
/// `width`/`height` are the dimensions of the layer's output map. For
/// `BinConv` (stride 1, zero padding) they equal the input dimensions; a 2×2
/// `Maxpool` reads a `2·width × 2·height` map; `FullyConn` is `1×1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LayerSpec {
    pub kind: LayerKind,
    #[serde(default = "one")]
    pub width: usize,
    #[serde(default = "one")]
    pub height: usize,
    pub in_channels: usize,
    pub out_channels: usize,
    #[serde(default)]
    pub kernel_w: usize,
    #[serde(default)]
    pub kernel_h: usize,
}

fn one() -> usize {
    1
}

impl LayerSpec {
    pub fn binconv(width: usize, height: usize, in_channels: usize, out_channels: usize, kernel_w: usize, kernel_h: usize) -> Self {
        Self { kind: LayerKind::BinConv, width, height, in_channels, out_channels, kernel_w, kernel_h }
    }

    pub fn maxpool(out_width: usize, out_height: usize, channels: usize) -> Self {
        Self {
            kind: LayerKind::Maxpool,
            width: out_width,
            height: out_height,
            in_channels: channels,
            out_channels: channels,
            kernel_w: 0,
            kernel_h: 0,
        }
    }

    pub fn fully_conn(in_features: usize, out_features: usize) -> Self {
        Self {
            kind: LayerKind::FullyConn,
            width: 1,
            height: 1,
            in_channels: in_features,
            out_channels: out_features,
            kernel_w: 0,
            kernel_h: 0,
        }
    }

    /// Bits compared per output value (popcount width); 0 for Maxpool.
    pub fn fan_in(&self) -> usize {
        match self.kind {
            LayerKind::BinConv => self.kernel_w * self.kernel_h * self.in_channels,
            LayerKind::FullyConn => self.in_channels,
            LayerKind::Maxpool => 0,
        }
    }

    pub fn has_weights(&self) -> bool {
        self.kind != LayerKind::Maxpool
    }

    pub fn input_shape(&self) -> (usize, usize, usize) {
        match self.kind {
            LayerKind::BinConv => (self.width, self.height, self.in_channels),
            LayerKind::Maxpool => (2 * self.width, 2 * self.height, self.in_channels),
            LayerKind::FullyConn => (1, 1, self.in_channels),
        }
    }

    pub fn output_shape(&self) -> (usize, usize, usize) {
        (self.width, self.height, self.out_channels)
    }

    pub fn validate(&self) -> Result<(), BnnError> {
        let dims = [self.width, self.height, self.in_channels, self.out_channels];
        if dims.contains(&0) {
            return Err(BnnError::InvalidLayer(format!("{self:?}: dimensions must be positive")));
        }
        match self.kind {
            LayerKind::BinConv if self.kernel_w == 0 || self.kernel_h == 0 => {
                Err(BnnError::InvalidLayer(format!("{self:?}: BinConv needs a positive kernel")))
            }
            LayerKind::Maxpool if self.in_channels != self.out_channels => {
                Err(BnnError::InvalidLayer(format!("{self:?}: Maxpool keeps the channel count")))
            }
            LayerKind::FullyConn if self.width != 1 || self.height != 1 => {
                Err(BnnError::InvalidLayer(format!("{self:?}: FullyConn output is 1x1")))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InputShape {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BnnTopology {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub note: String,
    pub input: InputShape,
    pub layers: Vec<LayerSpec>,
}

impl BnnTopology {
    pub fn new(input: InputShape, layers: Vec<LayerSpec>) -> Self {
        Self { name: String::new(), note: String::new(), input, layers }
    }

    /// Checks that every layer is well formed, shapes chain, and the network
    /// ends in a FullyConn classifier.
    pub fn validate(&self) -> Result<(), BnnError> {
        let mut shape = (self.input.width, self.input.height, self.input.channels);
        if shape.0 == 0 || shape.1 == 0 || shape.2 == 0 {
            return Err(BnnError::InvalidTopology("input shape must be positive".into()));
        }
        for (i, layer) in self.layers.iter().enumerate() {
            layer.validate()?;
            let expected = layer.input_shape();
            let ok = match layer.kind {
                LayerKind::FullyConn => shape.0 * shape.1 * shape.2 == layer.in_channels,
                _ => shape == expected,
            };
            if !ok {
                return Err(BnnError::InvalidTopology(format!(
                    "layer {i} ({}) expects input {:?} but receives {:?}",
                    layer.kind, expected, shape
                )));
            }
            shape = layer.output_shape();
        }
        match self.layers.last() {
            Some(l) if l.kind == LayerKind::FullyConn => Ok(()),
            Some(_) => Err(BnnError::InvalidTopology("last layer must be FullyConn".into())),
            None => Ok(()),
        }
    }

    pub fn num_classes(&self) -> usize {
        self.layers.last().map_or(0, |l| l.out_channels)
    }

    pub fn from_toml_str(s: &str) -> Result<Self, BnnError> {
        let topo: BnnTopology = toml::from_str(s).map_err(|e| BnnError::Parse(e.to_string()))?;
        topo.validate()?;
        Ok(topo)
    }

    pub fn load(path: &Path) -> Result<Self, BnnError> {
        let text = std::fs::read_to_string(path).map_err(|e| BnnError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            BnnError::Parse(msg) => BnnError::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("topology serializes")
    }

    /// VGG-like 12-layer CIFAR-10 network: 2×128C3, MP2, 2×256C3, MP2,
    /// 2×512C3, MP2, FC1024, FC1024, FC10.
    pub fn vgg_like_12() -> Self {
        Self {
            name: "vgg-like-12".into(),
            note: "reconstructed VGG-like BNN (6 BinConv, 3 Maxpool, 3 FullyConn)".into(),
            input: InputShape { width: 32, height: 32, channels: 3 },
            layers: vec![
                LayerSpec::binconv(32, 32, 3, 128, 3, 3),
                LayerSpec::binconv(32, 32, 128, 128, 3, 3),
                LayerSpec::maxpool(16, 16, 128),
                LayerSpec::binconv(16, 16, 128, 256, 3, 3),
                LayerSpec::binconv(16, 16, 256, 256, 3, 3),
                LayerSpec::maxpool(8, 8, 256),
                LayerSpec::binconv(8, 8, 256, 512, 3, 3),
                LayerSpec::binconv(8, 8, 512, 512, 3, 3),
                LayerSpec::maxpool(4, 4, 512),
                LayerSpec::fully_conn(4 * 4 * 512, 1024),
                LayerSpec::fully_conn(1024, 1024),
                LayerSpec::fully_conn(1024, 10),
            ],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_topology_chains() {
        let t = BnnTopology::vgg_like_12();
        t.validate().unwrap();
        assert_eq!(t.layers.len(), 12);
        assert_eq!(t.num_classes(), 10);
    }

    #[test]
    fn toml_round_trip() {
        let t = BnnTopology::vgg_like_12();
        let back = BnnTopology::from_toml_str(&t.to_toml_string()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn broken_chain_is_rejected() {
        let mut t = BnnTopology::vgg_like_12();
        t.layers[1].in_channels = 64;
        assert!(matches!(t.validate(), Err(BnnError::InvalidTopology(_))));
        let mut t = BnnTopology::vgg_like_12();
        t.layers.pop();
        t.layers.pop();
        t.layers.pop();
        assert!(t.validate().is_err());
    }

    #[test]
    fn layer_dimension_checks() {
        assert!(LayerSpec::binconv(4, 4, 1, 1, 0, 3).validate().is_err());
        assert!(LayerSpec::maxpool(0, 2, 3).validate().is_err());
        assert_eq!(LayerSpec::maxpool(16, 16, 128).input_shape(), (32, 32, 128));
    }
}
