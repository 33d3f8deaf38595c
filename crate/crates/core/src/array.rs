//! Multi-level skyrmionic bit-cell and the in-memory array built from it.
//!
//! Each cell has four free-layer regions: inputs `A`, `B` and oscillator
//! outputs `O1`, `O2`, each behind its own access transistor. All cells of
//! one array share a heavy-metal film, so a reset annihilates every skyrmion
//! in the array at once.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::device::{classify_phase_window, DeviceError, DeviceModel, PhaseWindow, PulseSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ArrayError {
    #[error("cannot write 0 over a stored 1 in region {0}; reset the array first")]
    WriteWithoutReset(Region),
    #[error("output regions must be clear before compute (O1={o1}, O2={o2})")]
    DirtyOutputs { o1: bool, o2: bool },
    #[error("read at {voltage} V exceeds the disturb threshold of {threshold} V")]
    ReadDisturbRisk { voltage: f64, threshold: f64 },
    #[error("alignment {0} outside [-1, 1]")]
    AlignmentOutOfRange(f64),
    #[error("region {0} is not writable")]
    NotWritable(Region),
    #[error("cell index {index} out of range for {len} cells")]
    CellOutOfRange { index: usize, len: usize },
    #[error("invalid array parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Device(#[from] DeviceError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    A,
    B,
    O1,
    O2,
}

impl Region {
    pub const ALL: [Region; 4] = [Region::A, Region::B, Region::O1, Region::O2];

    fn index(self) -> usize {
        match self {
            Region::A => 0,
            Region::B => 1,
            Region::O1 => 2,
            Region::O2 => 3,
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Region::A => "A",
            Region::B => "B",
            Region::O1 => "O1",
            Region::O2 => "O2",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gate {
    And,
    Or,
    Xor,
}

impl Gate {
    pub fn eval(self, a: bool, b: bool) -> bool {
        match self {
            Gate::And => a & b,
            Gate::Or => a | b,
            Gate::Xor => a ^ b,
        }
    }
}

impl std::str::FromStr for Gate {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "and" => Ok(Gate::And),
            "or" => Ok(Gate::Or),
            "xor" => Ok(Gate::Xor),
            other => Err(format!("unknown gate '{other}' (expected and, or, xor)")),
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Gate::And => "AND",
            Gate::Or => "OR",
            Gate::Xor => "XOR",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResistancePair {
    pub r_parallel_ohm: f64,
    pub r_antiparallel_ohm: f64,
}

impl ResistancePair {
    pub fn new(r_parallel_ohm: f64, r_antiparallel_ohm: f64) -> Result<Self, ArrayError> {
        let pair = Self { r_parallel_ohm, r_antiparallel_ohm };
        pair.validate()?;
        Ok(pair)
    }

    pub fn validate(&self) -> Result<(), ArrayError> {
        if 0.0 < self.r_parallel_ohm && self.r_parallel_ohm < self.r_antiparallel_ohm {
            Ok(())
        } else {
            Err(ArrayError::InvalidParams(format!(
                "need 0 < R_P < R_AP, got R_P={} R_AP={}",
                self.r_parallel_ohm, self.r_antiparallel_ohm
            )))
        }
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.r_parallel_ohm + self.r_antiparallel_ohm)
    }
}

/// MTJ resistance for a free/pinned layer alignment `m·m_p` in `[-1, 1]`.
pub fn resistance_model(rp: &ResistancePair, alignment: f64) -> Result<f64, ArrayError> {
    if !(-1.0..=1.0).contains(&alignment) {
        return Err(ArrayError::AlignmentOutOfRange(alignment));
    }
    Ok(rp.r_parallel_ohm + (rp.r_antiparallel_ohm - rp.r_parallel_ohm) * (1.0 - alignment) / 2.0)
}

/// A skyrmion core reverses the free layer under the MTJ.
pub fn skyrmion_alignment(skyrmion: bool) -> f64 {
    if skyrmion {
        -1.0
    } else {
        1.0
    }
}

/// Electrical and timing parameters of one array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArrayParams {
    pub capacity_bytes: usize,
    pub rows: usize,
    pub cols: usize,
    pub r_parallel_ohm: f64,
    pub r_antiparallel_ohm: f64,
    pub write_voltage_v: f64,
    pub compute_voltage_v: f64,
    pub read_voltage_v: f64,
    pub row_select_on_v: f64,
    pub read_disturb_threshold_v: f64,
    pub write_drive_ns: f64,
    pub relaxation_ns: f64,
    pub and_drive_ns: f64,
    pub or_drive_ns: f64,
    pub read_ns: f64,
    pub reset_ns: f64,
}

impl Default for ArrayParams {
    fn default() -> Self {
        Self {
            capacity_bytes: 1024,
            rows: 64,
            cols: 64,
            r_parallel_ohm: 5.0e3,
            r_antiparallel_ohm: 1.0e4,
            write_voltage_v: 0.81,
            compute_voltage_v: 0.79,
            read_voltage_v: 0.25,
            row_select_on_v: 1.0,
            read_disturb_threshold_v: 0.5,
            write_drive_ns: 2.0,
            relaxation_ns: 0.5,
            and_drive_ns: 2.5,
            or_drive_ns: 5.0,
            read_ns: 1.0,
            reset_ns: 2.0,
        }
    }
}

impl ArrayParams {
    pub fn resistance(&self) -> ResistancePair {
        ResistancePair { r_parallel_ohm: self.r_parallel_ohm, r_antiparallel_ohm: self.r_antiparallel_ohm }
    }

    pub fn cells(&self) -> usize {
        self.rows * self.cols
    }

    /// Checks internal consistency and that the drive voltages land in the
    /// intended phase windows of `device`.
    pub fn validate(&self, device: &DeviceModel) -> Result<(), ArrayError> {
        self.resistance().validate()?;
        if self.rows == 0 || self.cols == 0 {
            return Err(ArrayError::InvalidParams("rows and cols must be > 0".into()));
        }
        // two data bits (A, B) per cell
        if self.rows * self.cols * 2 != 8 * self.capacity_bytes {
            return Err(ArrayError::InvalidParams(format!(
                "{}x{} cells hold {} data bits, capacity {} B needs {}",
                self.rows,
                self.cols,
                self.rows * self.cols * 2,
                self.capacity_bytes,
                8 * self.capacity_bytes
            )));
        }
        let times = [
            ("write_drive_ns", self.write_drive_ns),
            ("and_drive_ns", self.and_drive_ns),
            ("or_drive_ns", self.or_drive_ns),
            ("read_ns", self.read_ns),
            ("reset_ns", self.reset_ns),
        ];
        for (name, t) in times {
            if !(t > 0.0) {
                return Err(ArrayError::InvalidParams(format!("{name} must be > 0")));
            }
        }
        if !(self.relaxation_ns >= 0.0) {
            return Err(ArrayError::InvalidParams("relaxation_ns must be >= 0".into()));
        }
        if self.read_voltage_v > self.read_disturb_threshold_v {
            return Err(ArrayError::ReadDisturbRisk {
                voltage: self.read_voltage_v,
                threshold: self.read_disturb_threshold_v,
            });
        }
        let write = classify_phase_window(&PulseSpec::new(self.write_voltage_v, self.write_drive_ns)?, &device.thresholds)?;
        if write.window != PhaseWindow::Nucleate {
            return Err(ArrayError::InvalidParams(format!(
                "write voltage {} V classifies as {:?}, expected Nucleate",
                self.write_voltage_v, write.window
            )));
        }
        let compute = classify_phase_window(&PulseSpec::new(self.compute_voltage_v, self.or_drive_ns)?, &device.thresholds)?;
        if compute.window != PhaseWindow::Oscillate {
            return Err(ArrayError::InvalidParams(format!(
                "compute voltage {} V classifies as {:?}, expected Oscillate",
                self.compute_voltage_v, compute.window
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ControlLine {
    Csl1,
    Csl2,
    Csl3,
    Rsl1,
    Rsl2,
    Rsl3,
    Rsl4,
}

impl fmt::Display for ControlLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ControlLine::Csl1 => "CSL1",
            ControlLine::Csl2 => "CSL2",
            ControlLine::Csl3 => "CSL3",
            ControlLine::Rsl1 => "RSL1",
            ControlLine::Rsl2 => "RSL2",
            ControlLine::Rsl3 => "RSL3",
            ControlLine::Rsl4 => "RSL4",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OpKind {
    WriteA,
    WriteB,
    ComputeO1,
    ComputeO2,
    Read(Region),
    Reset,
}

/// Line stimuli for one bit-cell operation. Lines not listed are held at
/// 0 V; `CSL1` is the common return and never driven.
#[derive(Debug, Clone, PartialEq)]
pub struct OperationSchedule {
    pub op: OpKind,
    pub line_voltages: Vec<(ControlLine, f64)>,
    /// In-plane heavy-metal current (reset only).
    pub heavy_metal_current: bool,
    pub duration_ns: f64,
    pub relaxation_ns: f64,
}

impl OperationSchedule {
    pub fn voltage(&self, line: ControlLine) -> f64 {
        self.line_voltages.iter().find(|(l, _)| *l == line).map_or(0.0, |(_, v)| *v)
    }

    pub fn energized(&self) -> Vec<ControlLine> {
        self.line_voltages.iter().map(|(l, _)| *l).collect()
    }

    pub fn total_ns(&self) -> f64 {
        self.duration_ns + self.relaxation_ns
    }

    /// The column-line pulse seen by the target region.
    pub fn pulse(&self) -> Option<PulseSpec> {
        let v = self.voltage(ControlLine::Csl2).max(self.voltage(ControlLine::Csl3));
        (v > 0.0).then_some(PulseSpec { voltage: v, width_ns: self.duration_ns })
    }
}

fn row_select(region: Region) -> ControlLine {
    match region {
        Region::A => ControlLine::Rsl1,
        Region::B => ControlLine::Rsl2,
        Region::O1 => ControlLine::Rsl3,
        Region::O2 => ControlLine::Rsl4,
    }
}

fn column_select(region: Region) -> ControlLine {
    match region {
        Region::A | Region::B => ControlLine::Csl2,
        Region::O1 | Region::O2 => ControlLine::Csl3,
    }
}

pub fn schedule_for(op: OpKind, p: &ArrayParams) -> OperationSchedule {
    let drive = |region: Region, v: f64, duration_ns: f64, relaxation_ns: f64| OperationSchedule {
        op,
        line_voltages: vec![(column_select(region), v), (row_select(region), p.row_select_on_v)],
        heavy_metal_current: false,
        duration_ns,
        relaxation_ns,
    };
    match op {
        OpKind::WriteA => drive(Region::A, p.write_voltage_v, p.write_drive_ns, p.relaxation_ns),
        OpKind::WriteB => drive(Region::B, p.write_voltage_v, p.write_drive_ns, p.relaxation_ns),
        OpKind::ComputeO1 => drive(Region::O1, p.compute_voltage_v, p.and_drive_ns, p.relaxation_ns),
        OpKind::ComputeO2 => drive(Region::O2, p.compute_voltage_v, p.or_drive_ns, p.relaxation_ns),
        OpKind::Read(region) => drive(region, p.read_voltage_v, p.read_ns, 0.0),
        OpKind::Reset => OperationSchedule {
            op,
            line_voltages: Vec::new(),
            heavy_metal_current: true,
            duration_ns: p.reset_ns,
            relaxation_ns: 0.0,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct BitCell {
    skyrmion: [bool; 4],
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTiming {
    pub target: Region,
    pub drive_ns: f64,
    pub relaxation_ns: f64,
    pub nucleated: bool,
}

impl PhaseTiming {
    pub fn total_ns(&self) -> f64 {
        self.drive_ns + self.relaxation_ns
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComputeOutcome {
    pub output: bool,
    pub output_region: Region,
    pub phases: Vec<PhaseTiming>,
}

impl ComputeOutcome {
    pub fn elapsed_ns(&self) -> f64 {
        self.phases.iter().map(PhaseTiming::total_ns).sum()
    }
}

impl BitCell {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn skyrmion(&self, region: Region) -> bool {
        self.skyrmion[region.index()]
    }

    pub fn resistance(&self, region: Region, rp: &ResistancePair) -> f64 {
        // alignment is always ±1 here, so this cannot fail
        resistance_model(rp, skyrmion_alignment(self.skyrmion(region))).expect("alignment in range")
    }

    pub fn is_clear(&self) -> bool {
        self.skyrmion.iter().all(|s| !s)
    }

    /// Writes an input bit and returns the device time spent. A `0` leaves
    /// the access switch off and costs no device time.
    pub fn write_bit(&mut self, region: Region, value: bool, p: &ArrayParams) -> Result<f64, ArrayError> {
        if !matches!(region, Region::A | Region::B) {
            return Err(ArrayError::NotWritable(region));
        }
        let current = self.skyrmion(region);
        if current && !value {
            return Err(ArrayError::WriteWithoutReset(region));
        }
        if !value {
            return Ok(0.0);
        }
        self.skyrmion[region.index()] = true;
        let op = if region == Region::A { OpKind::WriteA } else { OpKind::WriteB };
        Ok(schedule_for(op, p).total_ns())
    }

    fn run_phase(&mut self, target: Region, device: &DeviceModel, p: &ArrayParams) -> Result<PhaseTiming, ArrayError> {
        let (op, other) = match target {
            Region::O1 => (OpKind::ComputeO1, Region::O2),
            Region::O2 => (OpKind::ComputeO2, Region::O1),
            _ => unreachable!("compute phases only target output regions"),
        };
        let schedule = schedule_for(op, p);
        let pulse = schedule.pulse().expect("compute schedules drive CSL3");
        let inputs = (self.skyrmion(Region::A), self.skyrmion(Region::B));
        let nucleated = device.stno_outcome(inputs, self.skyrmion(other), &pulse)?;
        if nucleated {
            self.skyrmion[target.index()] = true;
        }
        Ok(PhaseTiming { target, drive_ns: schedule.duration_ns, relaxation_ns: schedule.relaxation_ns, nucleated })
    }

    /// Runs a gate on the stored inputs. Every nucleation decision comes from
    /// the device model; the output is left in O1 (AND) or O2 (OR, XOR).
    pub fn compute(&mut self, gate: Gate, device: &DeviceModel, p: &ArrayParams) -> Result<ComputeOutcome, ArrayError> {
        let (o1, o2) = (self.skyrmion(Region::O1), self.skyrmion(Region::O2));
        if o1 || o2 {
            return Err(ArrayError::DirtyOutputs { o1, o2 });
        }
        let phases = match gate {
            Gate::And => vec![self.run_phase(Region::O1, device, p)?],
            Gate::Or => vec![self.run_phase(Region::O2, device, p)?],
            // (A + B)·¬(A·B): O1 holds A·B, whose skyrmion suppresses O2.
            Gate::Xor => vec![self.run_phase(Region::O1, device, p)?, self.run_phase(Region::O2, device, p)?],
        };
        let output_region = phases.last().map(|ph| ph.target).expect("at least one phase");
        Ok(ComputeOutcome { output: self.skyrmion(output_region), output_region, phases })
    }

    /// Sense-amplifier read: 1 iff the MTJ resistance is above the R_P/R_AP midpoint.
    pub fn read(&self, region: Region, voltage: f64, p: &ArrayParams) -> Result<bool, ArrayError> {
        if voltage > p.read_disturb_threshold_v {
            return Err(ArrayError::ReadDisturbRisk { voltage, threshold: p.read_disturb_threshold_v });
        }
        let rp = p.resistance();
        Ok(self.resistance(region, &rp) > rp.midpoint())
    }

    fn clear(&mut self) {
        self.skyrmion = [false; 4];
    }
}

/// Counters accumulated by [`SimcArray`] while executing bulk gate work.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ArrayStats {
    pub writes_one: u64,
    pub writes_zero: u64,
    pub and_ops: u64,
    pub or_ops: u64,
    pub xor_ops: u64,
    pub reads: u64,
    pub resets: u64,
}

impl ArrayStats {
    pub fn merge(&mut self, other: &ArrayStats) {
        self.writes_one += other.writes_one;
        self.writes_zero += other.writes_zero;
        self.and_ops += other.and_ops;
        self.or_ops += other.or_ops;
        self.xor_ops += other.xor_ops;
        self.reads += other.reads;
        self.resets += other.resets;
    }
}

/// One in-memory computing unit: a grid of bit-cells on a shared film.
#[derive(Debug, Clone)]
pub struct SimcArray {
    params: ArrayParams,
    device: DeviceModel,
    cells: Vec<BitCell>,
    stats: ArrayStats,
    // cells at or past this index are known to be clear
    dirty: usize,
}

impl SimcArray {
    pub fn new(params: ArrayParams, device: DeviceModel) -> Result<Self, ArrayError> {
        device.validate()?;
        params.validate(&device)?;
        Ok(Self { cells: vec![BitCell::new(); params.cells()], params, device, stats: ArrayStats::default(), dirty: 0 })
    }

    pub fn params(&self) -> &ArrayParams {
        &self.params
    }

    pub fn device(&self) -> &DeviceModel {
        &self.device
    }

    pub fn rows(&self) -> usize {
        self.params.rows
    }

    pub fn cols(&self) -> usize {
        self.params.cols
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn stats(&self) -> ArrayStats {
        self.stats
    }

    pub fn cell(&self, row: usize, col: usize) -> &BitCell {
        &self.cells[row * self.params.cols + col]
    }

    fn cell_mut(&mut self, index: usize) -> Result<&mut BitCell, ArrayError> {
        let len = self.cells.len();
        let cell = self.cells.get_mut(index).ok_or(ArrayError::CellOutOfRange { index, len })?;
        self.dirty = self.dirty.max(index + 1);
        Ok(cell)
    }

    pub fn write(&mut self, index: usize, region: Region, value: bool) -> Result<f64, ArrayError> {
        let p = self.params;
        let ns = self.cell_mut(index)?.write_bit(region, value, &p)?;
        if value {
            self.stats.writes_one += 1;
        } else {
            self.stats.writes_zero += 1;
        }
        Ok(ns)
    }

    pub fn compute(&mut self, index: usize, gate: Gate) -> Result<ComputeOutcome, ArrayError> {
        let (p, device) = (self.params, self.device);
        let out = self.cell_mut(index)?.compute(gate, &device, &p)?;
        match gate {
            Gate::And => self.stats.and_ops += 1,
            Gate::Or => self.stats.or_ops += 1,
            Gate::Xor => self.stats.xor_ops += 1,
        }
        Ok(out)
    }

    pub fn read(&mut self, index: usize, region: Region, voltage: f64) -> Result<bool, ArrayError> {
        let len = self.cells.len();
        let cell = self.cells.get(index).ok_or(ArrayError::CellOutOfRange { index, len })?;
        let bit = cell.read(region, voltage, &self.params)?;
        self.stats.reads += 1;
        Ok(bit)
    }

    /// Annihilates every skyrmion on the shared film. Returns the reset time.
    pub fn reset(&mut self) -> f64 {
        self.cells[..self.dirty].iter_mut().for_each(BitCell::clear);
        self.dirty = 0;
        self.stats.resets += 1;
        schedule_for(OpKind::Reset, &self.params).total_ns()
    }

    /// Evaluates `gate` over operand pairs by filling the array, computing
    /// every cell, reading the outputs back and resetting, one array-load at
    /// a time.
    pub fn execute(&mut self, gate: Gate, operands: &[(bool, bool)]) -> Result<Vec<bool>, ArrayError> {
        let mut out = Vec::with_capacity(operands.len());
        let read_v = self.params.read_voltage_v;
        for chunk in operands.chunks(self.cells.len()) {
            for (i, &(a, b)) in chunk.iter().enumerate() {
                self.write(i, Region::A, a)?;
                self.write(i, Region::B, b)?;
                let outcome = self.compute(i, gate)?;
                out.push(self.read(i, outcome.output_region, read_v)?);
            }
            self.reset();
        }
        Ok(out)
    }

    /// Text dump, one line per row, each cell as four bits `A B O1 O2`.
    pub fn dump(&self) -> String {
        let mut s = String::with_capacity(self.cells.len() * 5);
        for row in self.cells.chunks(self.params.cols) {
            let line: Vec<String> = row
                .iter()
                .map(|c| Region::ALL.iter().map(|&r| if c.skyrmion(r) { '1' } else { '0' }).collect())
                .collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }
}
