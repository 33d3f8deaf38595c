//! Energy/latency roll-up over a network's primitive operation counts.
//!
//! Energy is additive over every primitive event. Latency assumes each layer
//! owns `simc_units_per_layer` arrays that work in lock-step waves (one
//! operand pair per cell), plus a popcount bank per array row; layers run
//! back to back.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bnn::{layer_op_counts, BnnTopology, LayerKind, OpCounts};
use crate::peripherals::PopcountParams;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PerfError {
    #[error("cost ledger has no entry for {0}")]
    MissingCostEntry(Primitive),
    #[error("infeasible calibration: {0}")]
    Infeasible(String),
    #[error("{param} change {change} outside the sweep table range [{min}, {max}]")]
    OutOfRange { param: MaterialParam, change: f64, min: f64, max: f64 },
    #[error("invalid hardware description: {0}")]
    InvalidHardware(String),
    #[error("invalid cost ledger: {0}")]
    InvalidLedger(String),
    #[error("{0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Primitive {
    WriteBit,
    XorOp,
    OrOp,
    AndOp,
    Reset,
    Read,
    PopcountBlock,
    Comparator,
}

impl Primitive {
    pub const ALL: [Primitive; 8] = [
        Primitive::WriteBit,
        Primitive::XorOp,
        Primitive::OrOp,
        Primitive::AndOp,
        Primitive::Reset,
        Primitive::Read,
        Primitive::PopcountBlock,
        Primitive::Comparator,
    ];

    /// Operations performed by the skyrmionic array itself (as opposed to
    /// the SOT-MTJ peripherals).
    pub fn is_skyrmionic(self) -> bool {
        !matches!(self, Primitive::PopcountBlock | Primitive::Comparator)
    }

    pub fn name(self) -> &'static str {
        match self {
            Primitive::WriteBit => "write_bit",
            Primitive::XorOp => "xor_op",
            Primitive::OrOp => "or_op",
            Primitive::AndOp => "and_op",
            Primitive::Reset => "reset",
            Primitive::Read => "read",
            Primitive::PopcountBlock => "popcount_block",
            Primitive::Comparator => "comparator",
        }
    }
}

impl fmt::Display for Primitive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Value stated in the published description.
    Published,
    /// Back-solved from headline totals.
    Calibrated,
    /// Placeholder with no external basis.
    Default,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Published => "published",
            Provenance::Calibrated => "calibrated",
            Provenance::Default => "default",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostEntry {
    pub energy_pj: f64,
    pub latency_ns: f64,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CostLedger {
    pub entries: BTreeMap<Primitive, CostEntry>,
    /// Free-form provenance notes carried into reports.
    #[serde(default)]
    pub notes: Vec<String>,
}

impl CostLedger {
    /// Ledger holding only the popcount block cost stated in the text.
    pub fn with_fixed_popcount(p: &PopcountParams) -> Self {
        let mut ledger = Self::default();
        ledger.entries.insert(
            Primitive::PopcountBlock,
            CostEntry { energy_pj: p.block_energy_pj, latency_ns: p.block_latency_ns, provenance: Provenance::Published },
        );
        ledger
    }

    pub fn get(&self, p: Primitive) -> Result<&CostEntry, PerfError> {
        self.entries.get(&p).ok_or(PerfError::MissingCostEntry(p))
    }

    pub fn validate(&self) -> Result<(), PerfError> {
        for (p, e) in &self.entries {
            if !(e.energy_pj >= 0.0 && e.latency_ns >= 0.0) {
                return Err(PerfError::InvalidLedger(format!("{p}: costs must be >= 0")));
            }
        }
        if let Some(pc) = self.entries.get(&Primitive::PopcountBlock) {
            if pc.provenance == Provenance::Published && (pc.energy_pj != 7.5 || pc.latency_ns != 10.0) {
                return Err(PerfError::InvalidLedger("published popcount block must be 7.5 pJ / 10 ns".into()));
            }
        }
        Ok(())
    }

    pub fn from_toml_str(s: &str) -> Result<Self, PerfError> {
        let ledger: CostLedger = toml::from_str(s).map_err(|e| PerfError::InvalidLedger(e.to_string()))?;
        ledger.validate()?;
        Ok(ledger)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("ledger serializes")
    }

    pub fn load(path: &Path) -> Result<Self, PerfError> {
        let text = std::fs::read_to_string(path).map_err(|e| PerfError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            PerfError::InvalidLedger(msg) => PerfError::InvalidLedger(format!("{}: {msg}", path.display())),
            other => other,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hardware {
    pub simc_units_per_layer: usize,
    pub cells_per_unit: usize,
    pub popcount_banks_per_unit: usize,
    pub popcount_block_bits: usize,
}

impl Default for Hardware {
    fn default() -> Self {
        Self { simc_units_per_layer: 2, cells_per_unit: 4096, popcount_banks_per_unit: 64, popcount_block_bits: 100 }
    }
}

impl Hardware {
    pub fn validate(&self) -> Result<(), PerfError> {
        if self.simc_units_per_layer == 0 {
            return Err(PerfError::InvalidHardware("parallelism must be >= 1".into()));
        }
        if self.cells_per_unit == 0 || self.popcount_banks_per_unit == 0 || self.popcount_block_bits == 0 {
            return Err(PerfError::InvalidHardware("cells, banks and block size must be > 0".into()));
        }
        Ok(())
    }
}

/// Per-primitive event counts (energy) and serial step counts (latency).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PrimitiveCount {
    pub events: u64,
    pub serial_steps: u64,
}

pub fn layer_primitive_counts(ops: &OpCounts, hw: &Hardware) -> BTreeMap<Primitive, PrimitiveCount> {
    let units = hw.simc_units_per_layer as u64;
    let cells = hw.cells_per_unit as u64;
    let banks = units * hw.popcount_banks_per_unit as u64;
    let waves = |n: u64| n.div_ceil(units * cells);

    let logic = ops.logic_ops();
    let gate_waves = waves(ops.xor) + waves(ops.or) + waves(ops.and);
    let blocks = ops.popcount_bits.div_ceil(hw.popcount_block_bits as u64);

    let mut m = BTreeMap::new();
    let mut put = |p, events, serial_steps| {
        if events > 0 {
            m.insert(p, PrimitiveCount { events, serial_steps });
        }
    };
    // both operands are written per op, zeros included (schedule slot)
    put(Primitive::WriteBit, 2 * logic, 2 * gate_waves);
    put(Primitive::XorOp, ops.xor, waves(ops.xor));
    put(Primitive::OrOp, ops.or, waves(ops.or));
    put(Primitive::AndOp, ops.and, waves(ops.and));
    put(Primitive::Read, logic, gate_waves);
    // every array load ends in a global reset
    put(Primitive::Reset, ops.xor.div_ceil(cells) + ops.or.div_ceil(cells) + ops.and.div_ceil(cells), gate_waves);
    put(Primitive::PopcountBlock, ops.popcounts * blocks, ops.popcounts.div_ceil(banks) * blocks);
    put(Primitive::Comparator, ops.comparators, ops.comparators.div_ceil(banks));
    m
}

#[derive(Debug, Clone, PartialEq)]
pub struct BreakdownLine {
    pub primitive: Primitive,
    pub count: PrimitiveCount,
    pub energy_pj: f64,
    pub latency_ns: f64,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerReport {
    pub index: usize,
    pub kind: LayerKind,
    pub ops: OpCounts,
    pub breakdown: Vec<BreakdownLine>,
}

impl LayerReport {
    pub fn energy_pj(&self) -> f64 {
        self.breakdown.iter().map(|b| b.energy_pj).sum()
    }

    pub fn latency_ns(&self) -> f64 {
        self.breakdown.iter().map(|b| b.latency_ns).sum()
    }

    pub fn energy_mj(&self) -> f64 {
        self.energy_pj() * 1e-9
    }

    pub fn latency_ms(&self) -> f64 {
        self.latency_ns() * 1e-6
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rollup {
    pub layers: Vec<LayerReport>,
}

impl Rollup {
    pub fn energy_mj(&self) -> f64 {
        self.layers.iter().map(LayerReport::energy_pj).sum::<f64>() * 1e-9
    }

    pub fn latency_ms(&self) -> f64 {
        self.layers.iter().map(LayerReport::latency_ns).sum::<f64>() * 1e-6
    }

    pub fn throughput(&self) -> f64 {
        throughput(self.latency_ms())
    }

    /// Energy of the skyrmionic array primitives only, in mJ.
    pub fn skyrmionic_energy_mj(&self) -> f64 {
        self.layers
            .iter()
            .flat_map(|l| &l.breakdown)
            .filter(|b| b.primitive.is_skyrmionic())
            .map(|b| b.energy_pj)
            .sum::<f64>()
            * 1e-9
    }
}

pub fn rollup(topo: &BnnTopology, ledger: &CostLedger, hw: &Hardware) -> Result<Rollup, PerfError> {
    hw.validate()?;
    let mut layers = Vec::with_capacity(topo.layers.len());
    for (index, spec) in topo.layers.iter().enumerate() {
        let ops = layer_op_counts(spec);
        let mut breakdown = Vec::new();
        for (primitive, count) in layer_primitive_counts(&ops, hw) {
            let entry = ledger.get(primitive)?;
            breakdown.push(BreakdownLine {
                primitive,
                count,
                energy_pj: count.events as f64 * entry.energy_pj,
                latency_ns: count.serial_steps as f64 * entry.latency_ns,
                provenance: entry.provenance,
            });
        }
        layers.push(LayerReport { index, kind: spec.kind, ops, breakdown });
    }
    Ok(Rollup { layers })
}

pub fn throughput(latency_ms: f64) -> f64 {
    1000.0 / latency_ms
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Headline {
    pub energy_mj: f64,
    pub latency_ms: f64,
}

/// Relative cost shape of the free primitives; only ratios matter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationPriors {
    pub energy: BTreeMap<Primitive, f64>,
    pub latency: BTreeMap<Primitive, f64>,
}

impl Default for CalibrationPriors {
    /// Active pulse time per event in ns: XOR 3.0 + 5.5, OR 5.5, AND 3.0,
    /// write 2.5, reset 2.0; read and comparator 1.0.
    fn default() -> Self {
        let shape: BTreeMap<Primitive, f64> = [
            (Primitive::WriteBit, 2.5),
            (Primitive::XorOp, 8.5),
            (Primitive::OrOp, 5.5),
            (Primitive::AndOp, 3.0),
            (Primitive::Reset, 2.0),
            (Primitive::Read, 1.0),
            (Primitive::Comparator, 1.0),
        ]
        .into_iter()
        .collect();
        Self { energy: shape.clone(), latency: shape }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub ledger: CostLedger,
    pub energy_scale: f64,
    pub latency_scale: f64,
}

/// Back-solves free per-primitive costs so that the roll-up reproduces
/// `headline`.
///
/// Free costs are parameterized as `scale × prior`; with one energy and one
/// latency constraint the least-squares fit of each scale is closed-form:
/// `scale = (target − fixed) / Σ count·prior`. Entries in `fixed` never move.
pub fn calibrate(
    headline: Headline,
    topo: &BnnTopology,
    hw: &Hardware,
    fixed: &CostLedger,
    priors: &CalibrationPriors,
) -> Result<Calibration, PerfError> {
    hw.validate()?;
    let mut totals: BTreeMap<Primitive, PrimitiveCount> = BTreeMap::new();
    for spec in &topo.layers {
        for (p, c) in layer_primitive_counts(&layer_op_counts(spec), hw) {
            let t = totals.entry(p).or_default();
            t.events += c.events;
            t.serial_steps += c.serial_steps;
        }
    }

    let mut fixed_energy_pj = 0.0;
    let mut fixed_latency_ns = 0.0;
    let mut shape_energy = 0.0;
    let mut shape_latency = 0.0;
    for (&p, c) in &totals {
        if let Some(e) = fixed.entries.get(&p) {
            fixed_energy_pj += c.events as f64 * e.energy_pj;
            fixed_latency_ns += c.serial_steps as f64 * e.latency_ns;
        } else {
            let pe = *priors.energy.get(&p).ok_or(PerfError::MissingCostEntry(p))?;
            let pl = *priors.latency.get(&p).ok_or(PerfError::MissingCostEntry(p))?;
            shape_energy += c.events as f64 * pe;
            shape_latency += c.serial_steps as f64 * pl;
        }
    }

    let target_energy_pj = headline.energy_mj * 1e9;
    let target_latency_ns = headline.latency_ms * 1e6;
    if !(target_energy_pj > fixed_energy_pj) || !(target_latency_ns > fixed_latency_ns) {
        return Err(PerfError::Infeasible(format!(
            "fixed entries alone need {:.6} mJ / {:.6} ms, headline is {} mJ / {} ms",
            fixed_energy_pj * 1e-9,
            fixed_latency_ns * 1e-6,
            headline.energy_mj,
            headline.latency_ms
        )));
    }
    if shape_energy <= 0.0 || shape_latency <= 0.0 {
        return Err(PerfError::Infeasible("topology exercises no free primitive".into()));
    }
    let energy_scale = (target_energy_pj - fixed_energy_pj) / shape_energy;
    let latency_scale = (target_latency_ns - fixed_latency_ns) / shape_latency;

    let mut ledger = fixed.clone();
    for p in Primitive::ALL {
        if fixed.entries.contains_key(&p) {
            continue;
        }
        let (Some(pe), Some(pl)) = (priors.energy.get(&p), priors.latency.get(&p)) else {
            continue;
        };
        ledger.entries.insert(
            p,
            CostEntry { energy_pj: energy_scale * pe, latency_ns: latency_scale * pl, provenance: Provenance::Calibrated },
        );
    }
    ledger.notes.push(format!(
        "calibrated to {} mJ / {} ms on '{}' (energy scale {:.6e} pJ per prior unit, latency scale {:.6e} ns per prior unit)",
        headline.energy_mj, headline.latency_ms, topo.name, energy_scale, latency_scale
    ));
    Ok(Calibration { ledger, energy_scale, latency_scale })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaterialParam {
    /// Damping ratio α.
    Alpha,
    /// Anisotropy energy density K_U.
    Ku,
    /// Saturation magnetization M_S.
    Ms,
}

impl fmt::Display for MaterialParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MaterialParam::Alpha => "alpha",
            MaterialParam::Ku => "ku",
            MaterialParam::Ms => "ms",
        })
    }
}

impl std::str::FromStr for MaterialParam {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "alpha" => Ok(MaterialParam::Alpha),
            "ku" | "k_u" => Ok(MaterialParam::Ku),
            "ms" | "m_s" => Ok(MaterialParam::Ms),
            other => Err(format!("unknown material parameter '{other}' (expected alpha, ku, ms)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub parameter: MaterialParam,
    pub relative_change: f64,
    pub energy_multiplier: f64,
    pub speedup: f64,
}

/// Piecewise-linear anchors for material-parameter sensitivity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaterialSweepTable {
    pub rows: Vec<SweepRow>,
}

impl Default for MaterialSweepTable {
    /// α −33.3 %: energy −47 %, 1.3× faster. K_U −37.5 %: energy −36.84 %,
    /// 1.18×. M_S +10 %: energy −23.68 %, 1.13×.
    fn default() -> Self {
        let row = |parameter, relative_change, energy_multiplier, speedup| SweepRow {
            parameter,
            relative_change,
            energy_multiplier,
            speedup,
        };
        Self {
            rows: vec![
                row(MaterialParam::Alpha, 0.0, 1.0, 1.0),
                row(MaterialParam::Alpha, -0.333, 0.53, 1.3),
                row(MaterialParam::Ku, 0.0, 1.0, 1.0),
                row(MaterialParam::Ku, -0.375, 0.6316, 1.18),
                row(MaterialParam::Ms, 0.0, 1.0, 1.0),
                row(MaterialParam::Ms, 0.10, 0.7632, 1.13),
            ],
        }
    }
}

impl MaterialSweepTable {
    pub fn validate(&self) -> Result<(), PerfError> {
        for r in &self.rows {
            if !(r.energy_multiplier > 0.0 && r.speedup > 0.0) {
                return Err(PerfError::InvalidLedger(format!("sweep row {r:?}: multipliers must be > 0")));
            }
            if r.relative_change == 0.0 && (r.energy_multiplier != 1.0 || r.speedup != 1.0) {
                return Err(PerfError::InvalidLedger(format!("baseline row for {} must be (1, 1)", r.parameter)));
            }
        }
        Ok(())
    }

    /// `(energy_multiplier, speedup)` at `change`, interpolated linearly.
    pub fn lookup(&self, param: MaterialParam, change: f64) -> Result<(f64, f64), PerfError> {
        let mut rows: Vec<&SweepRow> = self.rows.iter().filter(|r| r.parameter == param).collect();
        rows.sort_by(|a, b| a.relative_change.total_cmp(&b.relative_change));
        let (Some(first), Some(last)) = (rows.first(), rows.last()) else {
            return Err(PerfError::OutOfRange { param, change, min: 0.0, max: 0.0 });
        };
        if !(change >= first.relative_change && change <= last.relative_change) {
            return Err(PerfError::OutOfRange { param, change, min: first.relative_change, max: last.relative_change });
        }
        for pair in rows.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if change >= a.relative_change && change <= b.relative_change {
                if change == a.relative_change {
                    return Ok((a.energy_multiplier, a.speedup));
                }
                if change == b.relative_change {
                    return Ok((b.energy_multiplier, b.speedup));
                }
                let t = (change - a.relative_change) / (b.relative_change - a.relative_change);
                return Ok((
                    a.energy_multiplier + t * (b.energy_multiplier - a.energy_multiplier),
                    a.speedup + t * (b.speedup - a.speedup),
                ));
            }
        }
        Ok((first.energy_multiplier, first.speedup))
    }
}

/// Scales skyrmionic energies by the table's multiplier and divides their
/// latencies by its speedup. Peripheral entries and provenance tags are kept.
pub fn apply_material_sweep(
    ledger: &CostLedger,
    param: MaterialParam,
    change: f64,
    table: &MaterialSweepTable,
) -> Result<CostLedger, PerfError> {
    let (energy_multiplier, speedup) = table.lookup(param, change)?;
    let mut out = ledger.clone();
    if change == 0.0 {
        return Ok(out);
    }
    for (p, e) in out.entries.iter_mut() {
        if p.is_skyrmionic() {
            e.energy_pj *= energy_multiplier;
            e.latency_ns /= speedup;
        }
    }
    out.notes.push(format!("material sweep {param} {change:+}: energy x{energy_multiplier}, speedup {speedup}x"));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bnn::{InputShape, LayerSpec};

    fn zero_free_ledger() -> CostLedger {
        let mut l = CostLedger::with_fixed_popcount(&PopcountParams::default());
        for p in Primitive::ALL {
            l.entries.entry(p).or_insert(CostEntry { energy_pj: 0.0, latency_ns: 0.0, provenance: Provenance::Default });
        }
        l
    }

    fn reference_calibration() -> Calibration {
        calibrate(
            Headline { energy_mj: 26.7, latency_ms: 2.7 },
            &BnnTopology::vgg_like_12(),
            &Hardware::default(),
            &CostLedger::with_fixed_popcount(&PopcountParams::default()),
            &CalibrationPriors::default(),
        )
        .unwrap()
    }

    #[test]
    fn single_popcount_cost() {
        let topo = BnnTopology::new(InputShape { width: 1, height: 1, channels: 100 }, vec![LayerSpec::fully_conn(100, 1)]);
        let r = rollup(&topo, &zero_free_ledger(), &Hardware::default()).unwrap();
        assert!((r.layers[0].energy_pj() - 7.5).abs() < 1e-12);
        assert!((r.layers[0].latency_ns() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn empty_topology_costs_nothing() {
        let topo = BnnTopology::new(InputShape { width: 1, height: 1, channels: 1 }, vec![]);
        let r = rollup(&topo, &CostLedger::default(), &Hardware::default()).unwrap();
        assert_eq!((r.energy_mj(), r.latency_ms()), (0.0, 0.0));
    }

    #[test]
    fn missing_entry_is_reported() {
        let ledger = CostLedger::with_fixed_popcount(&PopcountParams::default());
        let err = rollup(&BnnTopology::vgg_like_12(), &ledger, &Hardware::default()).unwrap_err();
        assert!(matches!(err, PerfError::MissingCostEntry(_)));
    }

    #[test]
    fn throughput_arithmetic() {
        assert!((throughput(2.7) - 370.370_370_370_370_4).abs() < 1e-9);
        assert_eq!(throughput(1000.0), 1.0);
        assert_eq!(throughput(2.0), 500.0);
    }

    #[test]
    fn calibration_reproduces_headline() {
        let cal = reference_calibration();
        let r = rollup(&BnnTopology::vgg_like_12(), &cal.ledger, &Hardware::default()).unwrap();
        assert!((r.energy_mj() / 26.7 - 1.0).abs() < 1e-3);
        assert!((r.latency_ms() / 2.7 - 1.0).abs() < 1e-3);
        let pc = cal.ledger.get(Primitive::PopcountBlock).unwrap();
        assert_eq!((pc.energy_pj, pc.latency_ns, pc.provenance), (7.5, 10.0, Provenance::Published));
        for p in Primitive::ALL.into_iter().filter(|&p| p != Primitive::PopcountBlock) {
            assert_eq!(cal.ledger.get(p).unwrap().provenance, Provenance::Calibrated);
        }
        // drive-time ratios survive
        let e = |p| cal.ledger.get(p).unwrap().energy_pj;
        assert!((e(Primitive::XorOp) / e(Primitive::AndOp) - 8.5 / 3.0).abs() < 1e-12);
        assert!((e(Primitive::OrOp) / e(Primitive::AndOp) - 5.5 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_headline_is_infeasible() {
        let err = calibrate(
            Headline { energy_mj: 0.0, latency_ms: 0.0 },
            &BnnTopology::vgg_like_12(),
            &Hardware::default(),
            &CostLedger::with_fixed_popcount(&PopcountParams::default()),
            &CalibrationPriors::default(),
        );
        assert!(matches!(err, Err(PerfError::Infeasible(_))));
    }

    #[test]
    fn calibration_is_affine_in_free_share() {
        let topo = BnnTopology::vgg_like_12();
        let hw = Hardware::default();
        let fixed = CostLedger::with_fixed_popcount(&PopcountParams::default());
        let priors = CalibrationPriors::default();
        let base = calibrate(Headline { energy_mj: 26.7, latency_ms: 2.7 }, &topo, &hw, &fixed, &priors).unwrap();
        let fixed_mj = rollup(&topo, &zero_free_ledger(), &hw).unwrap().energy_mj();
        // doubling the free share doubles every calibrated energy exactly
        let doubled_free = 2.0 * (26.7 - fixed_mj) + fixed_mj;
        let twice = calibrate(Headline { energy_mj: doubled_free, latency_ms: 2.7 }, &topo, &hw, &fixed, &priors).unwrap();
        // doubling the whole headline doubles them up to the fixed share
        let naive = calibrate(Headline { energy_mj: 53.4, latency_ms: 2.7 }, &topo, &hw, &fixed, &priors).unwrap();
        for p in Primitive::ALL.into_iter().filter(|&p| p != Primitive::PopcountBlock) {
            let (a, b, c) = (base.ledger.get(p).unwrap(), twice.ledger.get(p).unwrap(), naive.ledger.get(p).unwrap());
            assert!((b.energy_pj / a.energy_pj - 2.0).abs() < 1e-9);
            assert!((c.energy_pj / a.energy_pj - 2.0).abs() < 2.0 * fixed_mj / 26.7);
            assert_eq!(a.latency_ns, b.latency_ns);
        }
    }

    #[test]
    fn energy_is_additive_over_layers() {
        let topo = BnnTopology::vgg_like_12();
        let hw = Hardware::default();
        let ledger = reference_calibration().ledger;
        let whole = rollup(&topo, &ledger, &hw).unwrap();
        let mut sum = 0.0;
        for l in &topo.layers {
            let single = BnnTopology::new(topo.input, vec![*l]);
            sum += rollup(&single, &ledger, &hw).unwrap().energy_mj();
        }
        assert!((whole.energy_mj() - sum).abs() < 1e-12 * whole.energy_mj());
    }

    #[test]
    fn sweep_anchors() {
        let t = MaterialSweepTable::default();
        assert_eq!(t.lookup(MaterialParam::Alpha, -0.333).unwrap(), (0.53, 1.3));
        assert_eq!(t.lookup(MaterialParam::Ku, -0.375).unwrap(), (0.6316, 1.18));
        assert_eq!(t.lookup(MaterialParam::Ms, 0.10).unwrap(), (0.7632, 1.13));
        let (e, s) = t.lookup(MaterialParam::Ms, 0.05).unwrap();
        assert!((e - 0.8816).abs() < 1e-12 && (s - 1.065).abs() < 1e-12);
        assert!(matches!(t.lookup(MaterialParam::Alpha, 0.1), Err(PerfError::OutOfRange { .. })));
    }

    #[test]
    fn sweep_scales_skyrmionic_share_only() {
        let topo = BnnTopology::vgg_like_12();
        let hw = Hardware::default();
        let ledger = reference_calibration().ledger;
        let table = MaterialSweepTable::default();
        assert_eq!(apply_material_sweep(&ledger, MaterialParam::Alpha, 0.0, &table).unwrap(), ledger);

        let swept = apply_material_sweep(&ledger, MaterialParam::Alpha, -0.333, &table).unwrap();
        let before = rollup(&topo, &ledger, &hw).unwrap();
        let after = rollup(&topo, &swept, &hw).unwrap();
        let periph_before = before.energy_mj() - before.skyrmionic_energy_mj();
        let periph_after = after.energy_mj() - after.skyrmionic_energy_mj();
        assert!((after.skyrmionic_energy_mj() / before.skyrmionic_energy_mj() - 0.53).abs() < 1e-12);
        assert!((periph_after / periph_before - 1.0).abs() < 1e-9);
        for p in Primitive::ALL {
            assert_eq!(swept.get(p).unwrap().provenance, ledger.get(p).unwrap().provenance);
        }
    }

    #[test]
    fn ledger_toml_round_trip() {
        let ledger = reference_calibration().ledger;
        let back = CostLedger::from_toml_str(&ledger.to_toml_string()).unwrap();
        assert_eq!(back, ledger);
    }
}
