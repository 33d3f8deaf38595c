//! Shared simulator configuration: one TOML file, one section per module.
//! Every physical quantity carries its unit in the key name.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::array::ArrayParams;
use crate::device::{DeviceModel, DriveRule, GateGeometry, MaterialParams, PhaseThresholds, WaveParams};
use crate::faults::FaultTargets;
use crate::peripherals::PopcountParams;
use crate::perf::{CalibrationPriors, Hardware, Headline, MaterialSweepTable};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("{path}: {msg}")]
    Parse { path: String, msg: String },
    #[error("{path}: {msg}")]
    Invalid { path: String, msg: String },
    #[error("{0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeadlineConfig {
    pub energy_mj: f64,
    pub latency_ms: f64,
    pub throughput_images_per_s: f64,
    /// Relative tolerance for the drift check.
    pub tolerance: f64,
}

impl Default for HeadlineConfig {
    fn default() -> Self {
        Self { energy_mj: 26.7, latency_ms: 2.7, throughput_images_per_s: 370.4, tolerance: 0.01 }
    }
}

impl HeadlineConfig {
    pub fn target(&self) -> Headline {
        Headline { energy_mj: self.energy_mj, latency_ms: self.latency_ms }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FaultConfig {
    pub trials: usize,
    pub magnitude: u32,
    pub targets: FaultTargets,
    pub rates: Vec<f64>,
}

impl Default for FaultConfig {
    fn default() -> Self {
        Self { trials: 100, magnitude: 30, targets: FaultTargets::AllBinconv, rates: vec![0.01, 0.05, 0.1, 0.2, 0.3] }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub material: MaterialParams,
    pub wave: WaveParams,
    pub geometry: GateGeometry,
    pub phase_windows: PhaseThresholds,
    pub drive: DriveRule,
    pub array: ArrayParams,
    pub peripherals: PopcountParams,
    pub hardware: Hardware,
    pub headline: HeadlineConfig,
    pub calibration: CalibrationPriors,
    pub sweep: MaterialSweepTable,
    pub faults: FaultConfig,
}

impl SimConfig {
    pub fn device(&self) -> DeviceModel {
        DeviceModel { material: self.material, geometry: self.geometry, thresholds: self.phase_windows, drive: self.drive }
    }

    pub fn wave(&self) -> WaveParams {
        self.wave.with_wavelength(self.material.wavelength_nm)
    }

    pub fn validate(&self) -> Result<(), String> {
        let device = self.device();
        device.validate().map_err(|e| format!("[material/geometry/phase_windows] {e}"))?;
        self.wave().validate().map_err(|e| format!("[wave] {e}"))?;
        self.array.validate(&device).map_err(|e| format!("[array] {e}"))?;
        if self.peripherals.block_bits == 0 {
            return Err("[peripherals] block_bits must be > 0".into());
        }
        self.hardware.validate().map_err(|e| format!("[hardware] {e}"))?;
        if self.hardware.popcount_block_bits != self.peripherals.block_bits {
            return Err("[hardware] popcount_block_bits must equal [peripherals] block_bits".into());
        }
        if self.hardware.cells_per_unit != self.array.cells() {
            return Err(format!(
                "[hardware] cells_per_unit ({}) must equal array rows×cols ({})",
                self.hardware.cells_per_unit,
                self.array.cells()
            ));
        }
        let h = &self.headline;
        if !(h.energy_mj > 0.0 && h.latency_ms > 0.0 && h.tolerance > 0.0) {
            return Err("[headline] energy, latency and tolerance must be > 0".into());
        }
        self.sweep.validate().map_err(|e| format!("[sweep] {e}"))?;
        if self.faults.trials == 0 || self.faults.magnitude == 0 {
            return Err("[faults] trials and magnitude must be >= 1".into());
        }
        if let Some(r) = self.faults.rates.iter().find(|r| !(**r > 0.0 && **r <= 1.0)) {
            return Err(format!("[faults] rate {r} outside (0, 1]"));
        }
        Ok(())
    }

    pub fn from_toml_str(s: &str, origin: &str) -> Result<Self, ConfigError> {
        let cfg: SimConfig =
            toml::from_str(s).map_err(|e| ConfigError::Parse { path: origin.to_string(), msg: e.to_string() })?;
        cfg.validate().map_err(|msg| ConfigError::Invalid { path: origin.to_string(), msg })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text, &path.display().to_string())
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
