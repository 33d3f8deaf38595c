//! Reduced-order model of spin-wave driven skyrmion logic.
//!
//! A spin-torque nano-oscillator (STNO) emits spin waves; skyrmions at nearby
//! regions backscatter them. Whether the two waves reinforce or cancel depends
//! only on the separation `d` relative to the wavelength `λ`:
//! `d = λ + n·λ/4` is constructive for even `n` and destructive for odd `n`.
//! Gate decisions are made by counting constructive "drive" from input
//! skyrmions and comparing against the oscillator pulse width. The analytic
//! waveforms are exposed for inspection and plotting only.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DeviceError {
    #[error("invalid material parameters: {0}")]
    InvalidMaterial(String),
    #[error("invalid gate geometry: {0}")]
    InvalidGeometry(String),
    #[error("invalid pulse: {0}")]
    InvalidPulse(String),
    #[error("phase-window thresholds must be strictly increasing")]
    UnorderedThresholds,
    #[error("compute pulse of {voltage} V / {width} ns lies in the nucleation window and would write unconditionally")]
    NucleatingComputePulse { voltage: f64, width: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaterialParams {
    pub saturation_magnetization_a_per_m: f64,
    pub anisotropy_density_j_per_m3: f64,
    pub damping_ratio: f64,
    pub wavelength_nm: f64,
    pub skyrmion_radius_nm: f64,
}

impl Default for MaterialParams {
    /// Co/Pt thin-film values commonly used for skyrmion studies; wavelength
    /// and radius match the reference gate geometry.
    fn default() -> Self {
        Self {
            saturation_magnetization_a_per_m: 5.8e5,
            anisotropy_density_j_per_m3: 8.0e5,
            damping_ratio: 0.3,
            wavelength_nm: 100.0,
            skyrmion_radius_nm: 15.0,
        }
    }
}

impl MaterialParams {
    pub fn validate(&self) -> Result<(), DeviceError> {
        let fields = [
            ("saturation_magnetization_a_per_m", self.saturation_magnetization_a_per_m),
            ("anisotropy_density_j_per_m3", self.anisotropy_density_j_per_m3),
            ("damping_ratio", self.damping_ratio),
            ("wavelength_nm", self.wavelength_nm),
            ("skyrmion_radius_nm", self.skyrmion_radius_nm),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(DeviceError::InvalidMaterial(format!("{name} must be > 0, got {value}")));
            }
        }
        if self.damping_ratio >= 1.0 {
            return Err(DeviceError::InvalidMaterial(format!(
                "damping_ratio must be < 1, got {}",
                self.damping_ratio
            )));
        }
        if self.wavelength_nm <= 2.0 * self.skyrmion_radius_nm {
            return Err(DeviceError::InvalidMaterial(format!(
                "wavelength_nm ({}) must exceed the skyrmion diameter ({})",
                self.wavelength_nm,
                2.0 * self.skyrmion_radius_nm
            )));
        }
        Ok(())
    }
}

/// Fitting constants of the analytic spin-wave model. None of these have
/// published values; the defaults are placeholders for plotting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WaveParams {
    pub amplitude_emitted: f64,
    pub amplitude_scattered: f64,
    /// k = 2π/λ, always derived from the wavelength.
    #[serde(skip)]
    pub wave_vector_per_nm: f64,
    pub angular_frequency_rad_per_ns: f64,
    pub decay_fit_per_nm: f64,
    pub phase_fit_rad: f64,
}

impl Default for WaveParams {
    fn default() -> Self {
        Self {
            amplitude_emitted: 1.0,
            amplitude_scattered: 0.5,
            wave_vector_per_nm: wave_vector(100.0),
            angular_frequency_rad_per_ns: 2.0 * PI * 10.0,
            decay_fit_per_nm: 10.0,
            phase_fit_rad: 2.0 * PI,
        }
    }
}

impl WaveParams {
    pub fn with_wavelength(mut self, wavelength_nm: f64) -> Self {
        self.wave_vector_per_nm = wave_vector(wavelength_nm);
        self
    }

    pub fn validate(&self) -> Result<(), DeviceError> {
        let bad = |msg: String| Err(DeviceError::InvalidMaterial(msg));
        if self.amplitude_emitted < 0.0 || self.amplitude_scattered < 0.0 {
            return bad("wave amplitudes must be >= 0".into());
        }
        if !(self.decay_fit_per_nm > 0.0 && self.phase_fit_rad > 0.0) {
            return bad("decay_fit_per_nm and phase_fit_rad must be > 0".into());
        }
        if !(self.wave_vector_per_nm > 0.0) {
            return bad("wave vector must be > 0".into());
        }
        Ok(())
    }
}

pub fn wave_vector(wavelength_nm: f64) -> f64 {
    2.0 * PI / wavelength_nm
}

/// Emitted wave `A1·exp((k/k_f)·x − ω·t)·cos(k·x − ω·t)`.
pub fn emitted_wave(wp: &WaveParams, x_nm: f64, t_ns: f64) -> f64 {
    let k = wp.wave_vector_per_nm;
    let w = wp.angular_frequency_rad_per_ns;
    wp.amplitude_emitted * ((k / wp.decay_fit_per_nm) * x_nm - w * t_ns).exp() * (k * x_nm - w * t_ns).cos()
}

/// Backscattered wave `B1·exp((k/k_f)·x − ω·t − Φ/(2Φ_f))·cos(k·x − ω·t − Φ)`.
pub fn scattered_wave(wp: &WaveParams, x_nm: f64, t_ns: f64, phase_rad: f64) -> f64 {
    let k = wp.wave_vector_per_nm;
    let w = wp.angular_frequency_rad_per_ns;
    let envelope = (k / wp.decay_fit_per_nm) * x_nm - w * t_ns - phase_rad / (2.0 * wp.phase_fit_rad);
    wp.amplitude_scattered * envelope.exp() * (k * x_nm - w * t_ns - phase_rad).cos()
}

pub fn total_wave(wp: &WaveParams, x_nm: f64, t_ns: f64, phase_rad: f64) -> f64 {
    emitted_wave(wp, x_nm, t_ns) + scattered_wave(wp, x_nm, t_ns, phase_rad)
}

/// Round-trip phase `Φ = 2k(d − R)` picked up by a wave scattered off a
/// skyrmion of radius `R` whose centre sits at distance `d`.
pub fn scatter_phase(wave_vector_per_nm: f64, distance_nm: f64, radius_nm: f64) -> f64 {
    2.0 * wave_vector_per_nm * (distance_nm - radius_nm)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Interference {
    Constructive,
    Destructive,
    Neutral,
}

/// Nearest `n >= 0` with `|d − (λ + nλ/4)| <= λ/8`, if any.
pub fn quarter_wave_index(distance_nm: f64, wavelength_nm: f64) -> Option<u64> {
    let quarter = wavelength_nm / 4.0;
    let steps = (distance_nm - wavelength_nm) / quarter;
    let n = steps.round();
    if n < 0.0 {
        return None;
    }
    let offset = (distance_nm - (wavelength_nm + n * quarter)).abs();
    (offset <= wavelength_nm / 8.0).then_some(n as u64)
}

pub fn classify_interference(distance_nm: f64, wavelength_nm: f64) -> Interference {
    match quarter_wave_index(distance_nm, wavelength_nm) {
        Some(n) if n % 2 == 0 => Interference::Constructive,
        Some(_) => Interference::Destructive,
        None => Interference::Neutral,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GateGeometry {
    /// From input regions A/B to each output oscillator O1/O2.
    pub input_to_output_nm: f64,
    /// Between the two output oscillators.
    pub output_to_output_nm: f64,
}

impl Default for GateGeometry {
    fn default() -> Self {
        Self { input_to_output_nm: 150.0, output_to_output_nm: 125.0 }
    }
}

impl GateGeometry {
    pub fn validate(&self, wavelength_nm: f64) -> Result<(), DeviceError> {
        for (name, d) in [
            ("input_to_output_nm", self.input_to_output_nm),
            ("output_to_output_nm", self.output_to_output_nm),
        ] {
            if !(d > 0.0) {
                return Err(DeviceError::InvalidGeometry(format!("{name} must be > 0, got {d}")));
            }
            if quarter_wave_index(d, wavelength_nm).is_none() {
                return Err(DeviceError::InvalidGeometry(format!(
                    "{name} = {d} nm is not within λ/8 of λ + nλ/4 for λ = {wavelength_nm} nm"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    pub voltage: f64,
    pub width_ns: f64,
}

impl PulseSpec {
    pub fn new(voltage: f64, width_ns: f64) -> Result<Self, DeviceError> {
        if !(voltage >= 0.0) {
            return Err(DeviceError::InvalidPulse(format!("voltage must be >= 0, got {voltage}")));
        }
        if !(width_ns > 0.0) {
            return Err(DeviceError::InvalidPulse(format!("width must be > 0, got {width_ns}")));
        }
        Ok(Self { voltage, width_ns })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhaseWindow {
    Attenuate,
    Oscillate,
    Nucleate,
}

/// Voltage boundaries of the oscillator phase diagram (width-independent).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaseThresholds {
    pub attenuate_below_v: f64,
    pub oscillate_low_v: f64,
    pub oscillate_high_v: f64,
    pub nucleate_above_v: f64,
}

impl Default for PhaseThresholds {
    fn default() -> Self {
        Self { attenuate_below_v: 0.78, oscillate_low_v: 0.788, oscillate_high_v: 0.79, nucleate_above_v: 0.8 }
    }
}

impl PhaseThresholds {
    pub fn validate(&self) -> Result<(), DeviceError> {
        let ordered = self.attenuate_below_v < self.oscillate_low_v
            && self.oscillate_low_v < self.oscillate_high_v
            && self.oscillate_high_v < self.nucleate_above_v;
        if ordered {
            Ok(())
        } else {
            Err(DeviceError::UnorderedThresholds)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowClass {
    pub window: PhaseWindow,
    /// The voltage fell in an unmeasured gap and was snapped to the nearest boundary.
    pub gap_warning: bool,
}

/// Classifies a pulse. Voltages inside the two unmeasured gaps snap to the
/// nearer boundary's window; exact midpoints go to the lower window.
pub fn classify_phase_window(pulse: &PulseSpec, th: &PhaseThresholds) -> Result<WindowClass, DeviceError> {
    th.validate()?;
    let v = pulse.voltage;
    if !(v >= 0.0) {
        return Err(DeviceError::InvalidPulse(format!("voltage must be >= 0, got {v}")));
    }
    let exact = |window| Ok(WindowClass { window, gap_warning: false });
    let snapped = |window| Ok(WindowClass { window, gap_warning: true });
    if v < th.attenuate_below_v {
        exact(PhaseWindow::Attenuate)
    } else if v < th.oscillate_low_v {
        if v - th.attenuate_below_v <= th.oscillate_low_v - v {
            snapped(PhaseWindow::Attenuate)
        } else {
            snapped(PhaseWindow::Oscillate)
        }
    } else if v <= th.oscillate_high_v {
        exact(PhaseWindow::Oscillate)
    } else if v <= th.nucleate_above_v {
        if v - th.oscillate_high_v <= th.nucleate_above_v - v {
            snapped(PhaseWindow::Oscillate)
        } else {
            snapped(PhaseWindow::Nucleate)
        }
    } else {
        exact(PhaseWindow::Nucleate)
    }
}

/// Pulse-width requirements for nucleation under constructive drive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriveRule {
    /// Width at which two constructive drive units nucleate.
    pub fast_nucleation_ns: f64,
    /// Width at which a single drive unit nucleates.
    pub slow_nucleation_ns: f64,
    /// Drive units removed by a skyrmion at destructive distance from the
    /// active oscillator.
    pub destructive_penalty: i32,
}

impl Default for DriveRule {
    fn default() -> Self {
        Self { fast_nucleation_ns: 2.5, slow_nucleation_ns: 5.0, destructive_penalty: 2 }
    }
}

/// Everything the device layer needs to decide one oscillator phase.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DeviceModel {
    pub material: MaterialParams,
    pub geometry: GateGeometry,
    pub thresholds: PhaseThresholds,
    pub drive: DriveRule,
}

impl DeviceModel {
    pub fn validate(&self) -> Result<(), DeviceError> {
        self.material.validate()?;
        self.geometry.validate(self.material.wavelength_nm)?;
        self.thresholds.validate()
    }

    /// Net constructive drive seen by an activated output oscillator.
    pub fn effective_drive(&self, inputs: (bool, bool), other_output_skyrmion: bool) -> i32 {
        let lambda = self.material.wavelength_nm;
        let input_class = classify_interference(self.geometry.input_to_output_nm, lambda);
        let output_class = classify_interference(self.geometry.output_to_output_nm, lambda);
        let mut drive = 0;
        if input_class == Interference::Constructive {
            drive += inputs.0 as i32 + inputs.1 as i32;
        }
        if other_output_skyrmion && output_class == Interference::Destructive {
            drive -= self.drive.destructive_penalty;
        }
        drive
    }

    /// Whether a skyrmion nucleates at the activated output oscillator.
    ///
    /// `other_output_skyrmion` is the state of the opposite output region,
    /// which backscatters at the output-to-output distance.
    pub fn stno_outcome(
        &self,
        inputs: (bool, bool),
        other_output_skyrmion: bool,
        pulse: &PulseSpec,
    ) -> Result<bool, DeviceError> {
        let class = classify_phase_window(pulse, &self.thresholds)?;
        match class.window {
            PhaseWindow::Nucleate => {
                return Err(DeviceError::NucleatingComputePulse { voltage: pulse.voltage, width: pulse.width_ns })
            }
            // Oscillations die out before any wave can build up.
            PhaseWindow::Attenuate => return Ok(false),
            PhaseWindow::Oscillate => {}
        }
        let drive = self.effective_drive(inputs, other_output_skyrmion);
        let width = pulse.width_ns;
        Ok((drive >= 2 && width >= self.drive.fast_nucleation_ns) || (drive == 1 && width >= self.drive.slow_nucleation_ns))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn compute_pulse(width: f64) -> PulseSpec {
        PulseSpec::new(0.79, width).unwrap()
    }

    #[test]
    fn emitted_wave_trivial_points() {
        let wp = WaveParams::default();
        assert_eq!(emitted_wave(&wp, 0.0, 0.0), 1.0);
        let silent = WaveParams { amplitude_emitted: 0.0, ..wp };
        assert_eq!(emitted_wave(&silent, 37.0, 0.4), 0.0);
    }

    #[test]
    fn emitted_wave_matches_scalar_evaluation() {
        let wp = WaveParams {
            amplitude_emitted: 1.0,
            amplitude_scattered: 0.0,
            wave_vector_per_nm: 2.0 * PI / 100.0,
            angular_frequency_rad_per_ns: 3.0,
            decay_fit_per_nm: 4.0,
            phase_fit_rad: 1.0,
        };
        // k·x = π, k/k_f·x = π/4, t = 0: exp(π/4)·cos(π) = −2.1932800507380152
        let expected = -2.193_280_050_738_015_7;
        let got = emitted_wave(&wp, 50.0, 0.0);
        assert!(((got - expected) / expected).abs() < 1e-12, "{got}");
    }

    #[test]
    fn scattered_wave_limits() {
        let wp = WaveParams::default();
        let none = WaveParams { amplitude_scattered: 0.0, ..wp };
        assert_eq!(scattered_wave(&none, 12.0, 0.1, 1.0), 0.0);

        let same = WaveParams { amplitude_scattered: wp.amplitude_emitted, phase_fit_rad: 1e12, ..wp };
        for &(x, t) in &[(0.0, 0.0), (25.0, 0.01), (80.0, 0.05)] {
            let a = emitted_wave(&same, x, t);
            let b = scattered_wave(&same, x, t, 0.0);
            assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
        }
    }

    #[test]
    fn scatter_phase_reference_geometry() {
        let phase = scatter_phase(wave_vector(100.0), 125.0, 15.0);
        assert!((phase - 4.4 * PI).abs() < 1e-12);
    }

    #[test]
    fn superposition_without_scatterer_is_emission() {
        let wp = WaveParams { amplitude_scattered: 0.0, ..WaveParams::default() };
        for i in 0..20 {
            let x = i as f64 * 7.5;
            let t = i as f64 * 0.003;
            assert_eq!(total_wave(&wp, x, t, 1.3), emitted_wave(&wp, x, t));
        }
    }

    #[test]
    fn interference_anchor_distances() {
        assert_eq!(classify_interference(100.0, 100.0), Interference::Constructive);
        assert_eq!(classify_interference(125.0, 100.0), Interference::Destructive);
        assert_eq!(classify_interference(150.0, 100.0), Interference::Constructive);
    }

    #[test]
    fn interference_parity_exhaustive() {
        for &lambda in &[80.0, 100.0, 120.0] {
            for n in 0..=8u32 {
                let d = lambda + n as f64 * lambda / 4.0;
                let want = if n % 2 == 0 { Interference::Constructive } else { Interference::Destructive };
                assert_eq!(classify_interference(d, lambda), want, "λ={lambda} n={n}");
            }
        }
    }

    #[test]
    fn interference_neutral_off_grid() {
        // Below λ by more than λ/8 there is no valid n.
        assert_eq!(classify_interference(50.0, 100.0), Interference::Neutral);
        assert_eq!(classify_interference(87.0, 100.0), Interference::Neutral);
        // Tolerance edge
        assert_eq!(classify_interference(112.4, 100.0), Interference::Constructive);
        assert_eq!(classify_interference(113.0, 100.0), Interference::Destructive);
    }

    #[test]
    fn phase_window_anchor_voltages() {
        let th = PhaseThresholds::default();
        let c = |v, w| classify_phase_window(&PulseSpec::new(v, w).unwrap(), &th).unwrap();
        assert_eq!(c(0.75, 4.0).window, PhaseWindow::Attenuate);
        assert_eq!(c(0.789, 6.0).window, PhaseWindow::Oscillate);
        assert_eq!(c(0.81, 2.5).window, PhaseWindow::Nucleate);
        assert!(!c(0.789, 6.0).gap_warning);
    }

    #[test]
    fn phase_window_gaps_snap_with_warning() {
        let th = PhaseThresholds::default();
        let c = |v| classify_phase_window(&PulseSpec::new(v, 3.0).unwrap(), &th).unwrap();
        let low = c(0.781);
        assert_eq!((low.window, low.gap_warning), (PhaseWindow::Attenuate, true));
        assert_eq!(c(0.787).window, PhaseWindow::Oscillate);
        assert_eq!(c(0.792).window, PhaseWindow::Oscillate);
        assert_eq!(c(0.799).window, PhaseWindow::Nucleate);
        let edge = c(0.8);
        assert_eq!((edge.window, edge.gap_warning), (PhaseWindow::Nucleate, true));
    }

    #[test]
    fn negative_voltage_rejected() {
        assert!(PulseSpec::new(-0.1, 1.0).is_err());
        let raw = PulseSpec { voltage: -0.1, width_ns: 1.0 };
        assert!(classify_phase_window(&raw, &PhaseThresholds::default()).is_err());
    }

    #[test]
    fn stno_documented_cases() {
        let dev = DeviceModel::default();
        assert!(dev.stno_outcome((true, true), false, &compute_pulse(2.5)).unwrap());
        assert!(dev.stno_outcome((true, false), false, &compute_pulse(5.0)).unwrap());
        assert!(!dev.stno_outcome((true, true), true, &compute_pulse(5.0)).unwrap());
        assert!(!dev.stno_outcome((false, false), false, &compute_pulse(5.0)).unwrap());
        // single input is too weak for the short pulse
        assert!(!dev.stno_outcome((false, true), false, &compute_pulse(2.5)).unwrap());
    }

    #[test]
    fn stno_rejects_write_pulse() {
        let dev = DeviceModel::default();
        let err = dev.stno_outcome((true, false), false, &PulseSpec::new(0.81, 2.0).unwrap());
        assert!(matches!(err, Err(DeviceError::NucleatingComputePulse { .. })));
    }

    #[test]
    fn stno_attenuating_pulse_never_nucleates() {
        let dev = DeviceModel::default();
        assert!(!dev.stno_outcome((true, true), false, &PulseSpec::new(0.7, 10.0).unwrap()).unwrap());
    }

    #[test]
    fn stno_width_monotone() {
        let dev = DeviceModel::default();
        let widths: Vec<f64> = (1..=40).map(|i| i as f64 * 0.25).collect();
        for a in [false, true] {
            for b in [false, true] {
                for prior in [false, true] {
                    let mut seen = false;
                    for &w in &widths {
                        let out = dev.stno_outcome((a, b), prior, &compute_pulse(w)).unwrap();
                        assert!(!(seen && !out), "non-monotone at a={a} b={b} prior={prior} w={w}");
                        seen |= out;
                    }
                }
            }
        }
    }

    #[test]
    fn reference_geometry_is_valid() {
        DeviceModel::default().validate().unwrap();
        let bad = GateGeometry { input_to_output_nm: 90.0 - 20.0, ..GateGeometry::default() };
        assert!(bad.validate(100.0).is_err());
    }

    #[test]
    fn material_invariants() {
        let mut m = MaterialParams::default();
        m.validate().unwrap();
        m.damping_ratio = 1.0;
        assert!(m.validate().is_err());
        let m = MaterialParams { wavelength_nm: 30.0, ..MaterialParams::default() };
        assert!(m.validate().is_err());
    }
}
