//! `skysim` command line: argument parsing, fail-fast input loading and
//! report emission. Every command computes its full output in memory first
//! and only then touches the output directory.

pub mod render;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use skysim_core::array::{schedule_for, ArrayParams, BitCell, Gate, OpKind, Region, SimcArray};
use skysim_core::bnn::{BnnTopology, Network, OracleBackend, SimcBackend, WeightSet};
use skysim_core::config::SimConfig;
use skysim_core::dataset::{synthetic, Dataset, SyntheticSpec};
use skysim_core::device::{scatter_phase, total_wave};
use skysim_core::faults::{accuracy_sweep, FaultSpec, FaultTargets};
use skysim_core::perf::{
    apply_material_sweep, calibrate, rollup, CostLedger, MaterialParam, Primitive, Rollup,
};

use render::{footnotes, Format, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DRIFT: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DIVERGENCE: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        EXIT_CONFIG
    }
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "skysim", version, about = "Skyrmionic in-memory BNN accelerator simulator")]
pub struct Cli {
    /// Shared TOML configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Directory for output files (created on success only).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EngineChoice {
    Oracle,
    Simc,
    Both,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One bit-cell cycle (write, compute, read, reset) with timing.
    Gate {
        #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1))]
        a: u8,
        #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1))]
        b: u8,
        #[arg(long, value_parser = parse_gate)]
        op: Gate,
    },
    /// Classify a CIFAR-format dataset.
    Infer {
        #[arg(long)]
        topology: PathBuf,
        #[arg(long)]
        weights: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, value_enum, default_value_t = EngineChoice::Oracle)]
        engine: EngineChoice,
        /// Only the first N records.
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Per-layer energy/latency, totals and throughput.
    Report {
        /// Defaults to the reference 12-layer topology.
        #[arg(long)]
        topology: Option<PathBuf>,
        /// Defaults to calibrating in memory against the configured headline.
        #[arg(long)]
        ledger: Option<PathBuf>,
        /// Material change, e.g. `alpha=-0.333`.
        #[arg(long, value_parser = parse_sweep)]
        sweep: Option<(MaterialParam, f64)>,
    },
    /// Accuracy under injected popcount errors.
    Faults {
        #[arg(long)]
        topology: PathBuf,
        #[arg(long)]
        weights: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        /// Comma-separated rates; an empty string gives a baseline-only report.
        #[arg(long)]
        rates: Option<String>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        magnitude: Option<u32>,
        /// `all-binconv`, `one-at-a-time`, or layer indices like `0,2`.
        #[arg(long)]
        targets: Option<String>,
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Spin-wave amplitude samples along the emitter axis.
    Waves {
        #[arg(long, default_value_t = 0.0)]
        x_min_nm: f64,
        #[arg(long, default_value_t = 300.0)]
        x_max_nm: f64,
        #[arg(long, default_value_t = 61)]
        steps: usize,
        #[arg(long, default_value_t = 0.0)]
        t_ns: f64,
        /// Skyrmion distance; defaults to the input-to-output spacing.
        #[arg(long)]
        distance_nm: Option<f64>,
    },
    /// Load random operands into an array, compute, and dump the cell states.
    DumpArray {
        #[arg(long, value_parser = parse_gate)]
        op: Gate,
        #[arg(long, default_value_t = 64)]
        cells: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Back-solve a cost ledger from the configured headline totals.
    Calibrate {
        #[arg(long)]
        topology: Option<PathBuf>,
    },
    /// Write a seeded synthetic dataset in CIFAR record format.
    GenDataset {
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        classes: usize,
        #[arg(long, default_value_t = SyntheticSpec::default().noise)]
        noise: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn parse_gate(s: &str) -> Result<Gate, String> {
    s.parse::<Gate>().map_err(|e| e.to_string())
}

fn parse_sweep(s: &str) -> Result<(MaterialParam, f64), String> {
    let (p, v) = s.split_once('=').ok_or_else(|| format!("expected param=delta, got '{s}'"))?;
    let param = p.trim().parse::<MaterialParam>()?;
    let delta = v.trim().parse::<f64>().map_err(|e| format!("bad delta '{v}': {e}"))?;
    Ok((param, delta))
}

fn parse_rates(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|e| CliError::Config(format!("bad rate '{t}': {e}"))))
        .collect()
}

fn parse_targets(s: &str) -> Result<FaultTargets, CliError> {
    match s {
        "all-binconv" => Ok(FaultTargets::AllBinconv),
        "one-at-a-time" => Ok(FaultTargets::OneAtATime),
        list => list
            .split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|_| CliError::Config(format!("bad fault target '{t}'"))))
            .collect::<Result<Vec<_>, _>>()
            .map(FaultTargets::Layers),
    }
}

/// Everything a command produced; files are written only after success.
#[derive(Debug, Default)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub files: Vec<(String, Vec<u8>)>,
    pub code: i32,
}

pub fn load_config(path: Option<&Path>) -> Result<SimConfig, CliError> {
    match path {
        Some(p) => SimConfig::load(p).map_err(config_err),
        None => Ok(SimConfig::default()),
    }
}

fn load_topology(path: Option<&Path>) -> Result<BnnTopology, CliError> {
    match path {
        Some(p) => BnnTopology::load(p).map_err(config_err),
        None => Ok(BnnTopology::vgg_like_12()),
    }
}

fn load_network(topology: &Path, weights: &Path) -> Result<Network, CliError> {
    let topo = BnnTopology::load(topology).map_err(config_err)?;
    let w = WeightSet::load(weights, &topo).map_err(|e| CliError::Config(format!("{}: {e}", weights.display())))?;
    Network::new(topo, w).map_err(config_err)
}

fn load_dataset(path: &Path, classes: usize, limit: Option<usize>) -> Result<Dataset, CliError> {
    let mut d = Dataset::load(path).map_err(config_err)?;
    if let Some(n) = limit {
        d.records.truncate(n);
    }
    d.check_labels(classes).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok(d)
}

pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let cfg = load_config(cli.config.as_deref())?;
    match &cli.command {
        Command::Gate { a, b, op } => cmd_gate(&cfg, *a == 1, *b == 1, *op, cli.format),
        Command::Infer { topology, weights, dataset, engine, limit } => {
            cmd_infer(&cfg, topology, weights, dataset, *engine, *limit, cli.format)
        }
        Command::Report { topology, ledger, sweep } => {
            cmd_report(&cfg, topology.as_deref(), ledger.as_deref(), *sweep, cli.format)
        }
        Command::Faults { topology, weights, dataset, rates, seed, trials, magnitude, targets, limit } => {
            let rates = match rates {
                Some(s) => parse_rates(s)?,
                None => cfg.faults.rates.clone(),
            };
            let targets = match targets {
                Some(s) => parse_targets(s)?,
                None => cfg.faults.targets.clone(),
            };
            let spec = FaultSpec {
                rate: 1.0,
                magnitude: magnitude.unwrap_or(cfg.faults.magnitude),
                targets,
                seed: *seed,
            };
            cmd_faults(&cfg, topology, weights, dataset, &rates, &spec, trials.unwrap_or(cfg.faults.trials), *limit, cli.format)
        }
        Command::Waves { x_min_nm, x_max_nm, steps, t_ns, distance_nm } => {
            cmd_waves(&cfg, *x_min_nm, *x_max_nm, *steps, *t_ns, *distance_nm, cli.format)
        }
        Command::DumpArray { op, cells, seed } => cmd_dump_array(&cfg, *op, *cells, *seed),
        Command::Calibrate { topology } => cmd_calibrate(&cfg, topology.as_deref()),
        Command::GenDataset { n, classes, noise, seed } => {
            if cli.out.is_none() {
                return Err(CliError::Config("gen-dataset needs --out DIR".into()));
            }
            if !(0.0..=1.0).contains(noise) || *classes == 0 || *classes > 32 {
                return Err(CliError::Config("noise must be in [0, 1] and classes in 1..=32".into()));
            }
            let d = synthetic(*n, &SyntheticSpec { classes: *classes, noise: *noise, ..SyntheticSpec::default() }, *seed);
            Ok(Outcome {
                stdout: format!("{} records, {} classes, seed {}\n", d.len(), classes, seed),
                files: vec![("dataset.bin".into(), d.to_bytes())],
                ..Outcome::default()
            })
        }
    }
}

/// Writes the outcome's files into `out` (if any) and returns the exit code.
pub fn finish(outcome: &Outcome, out: Option<&Path>) -> Result<i32, CliError> {
    if let Some(dir) = out {
        if !outcome.files.is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
            for (name, bytes) in &outcome.files {
                let path = dir.join(name);
                std::fs::write(&path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            }
        }
    }
    Ok(outcome.code)
}

/// Parses `args`, runs the command, prints its output and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = execute(&cli).and_then(|o| {
        let code = finish(&o, cli.out.as_deref())?;
        Ok((o, code))
    });
    match result {
        Ok((o, code)) => {
            print!("{}", o.stdout);
            eprint!("{}", o.stderr);
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn bit(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

fn timing(drive_ns: f64, relaxation_ns: f64) -> String {
    if relaxation_ns > 0.0 {
        format!("{drive_ns:.1} ns + {relaxation_ns:.1} ns")
    } else {
        format!("{drive_ns:.1} ns")
    }
}

fn lines_for(op: OpKind, p: &ArrayParams) -> (String, String) {
    let s = schedule_for(op, p);
    if s.heavy_metal_current {
        return ("HM current".into(), "-".into());
    }
    let lines = s.energized().iter().map(ToString::to_string).collect::<Vec<_>>().join("+");
    let v = s.voltage(skysim_core::array::ControlLine::Csl2).max(s.voltage(skysim_core::array::ControlLine::Csl3));
    (lines, format!("{v:.2}"))
}

pub fn cmd_gate(cfg: &SimConfig, a: bool, b: bool, gate: Gate, format: Format) -> Result<Outcome, CliError> {
    let p = &cfg.array;
    let device = cfg.device();
    let mut cell = BitCell::new();
    let mut t = Table::new(["step", "lines", "voltage_v", "timing", "total_ns", "skyrmion"]);
    let mut total = 0.0;

    for (region, value, op) in [(Region::A, a, OpKind::WriteA), (Region::B, b, OpKind::WriteB)] {
        let spent = cell.write_bit(region, value, p).map_err(config_err)?;
        let s = schedule_for(op, p);
        let name = format!("write {region} = {}", bit(value));
        if value {
            let (lines, v) = lines_for(op, p);
            t.push([name, lines, v, timing(s.duration_ns, s.relaxation_ns), format!("{spent:.1}"), bit(true).into()]);
        } else {
            // a 0 leaves the access switch off but still takes its schedule slot
            t.push([name, "-".into(), "-".into(), "no pulse".into(), format!("{spent:.1}"), bit(false).into()]);
        }
        total += spent;
    }

    let outcome = cell.compute(gate, &device, p).map_err(config_err)?;
    for (i, ph) in outcome.phases.iter().enumerate() {
        let op = if ph.target == Region::O1 { OpKind::ComputeO1 } else { OpKind::ComputeO2 };
        let (lines, v) = lines_for(op, p);
        let name = if outcome.phases.len() > 1 {
            format!("compute {} (phase {})", ph.target, i + 1)
        } else {
            format!("compute {}", ph.target)
        };
        t.push([name, lines, v, timing(ph.drive_ns, ph.relaxation_ns), format!("{:.1}", ph.total_ns()), bit(ph.nucleated).into()]);
        total += ph.total_ns();
    }

    let read = cell.read(outcome.output_region, p.read_voltage_v, p).map_err(config_err)?;
    let rs = schedule_for(OpKind::Read(outcome.output_region), p);
    let (lines, _) = lines_for(OpKind::Read(outcome.output_region), p);
    t.push([
        format!("read {}", outcome.output_region),
        lines,
        format!("{:.2}", p.read_voltage_v),
        timing(rs.duration_ns, rs.relaxation_ns),
        format!("{:.1}", rs.total_ns()),
        bit(read).into(),
    ]);
    total += rs.total_ns();
    let reset = schedule_for(OpKind::Reset, p);
    let (lines, v) = lines_for(OpKind::Reset, p);
    t.push(["reset (global)".to_string(), lines, v, timing(reset.duration_ns, reset.relaxation_ns), format!("{:.1}", reset.total_ns()), "0".into()]);
    total += reset.total_ns();

    let expected = gate.eval(a, b);
    let mut out = Outcome::default();
    let _ = writeln!(out.stdout, "{gate}({}, {}) = {}", bit(a), bit(b), bit(read));
    out.stdout.push_str(&t.render(format));
    let _ = writeln!(out.stdout, "cycle total: {total:.1} ns");
    if read != expected {
        let _ = writeln!(out.stderr, "drift: device model gave {} but {gate} truth table says {}", bit(read), bit(expected));
        out.code = EXIT_DRIFT;
    }
    out.files.push(("gate.csv".into(), t.csv().into_bytes()));
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_infer(
    cfg: &SimConfig,
    topology: &Path,
    weights: &Path,
    dataset: &Path,
    engine: EngineChoice,
    limit: Option<usize>,
    format: Format,
) -> Result<Outcome, CliError> {
    let net = load_network(topology, weights)?;
    let data = load_dataset(dataset, net.topology.num_classes(), limit)?;
    let mut simc = match engine {
        EngineChoice::Oracle => None,
        _ => Some(SimcBackend::new(cfg.array, cfg.device(), cfg.peripherals).map_err(config_err)?),
    };

    let mut header = vec!["index", "label"];
    if engine != EngineChoice::Simc {
        header.push("oracle");
    }
    if engine != EngineChoice::Oracle {
        header.push("simc");
    }
    let mut t = Table::new(header);
    let mut out = Outcome::default();
    let (mut right_oracle, mut right_simc) = (0usize, 0usize);
    for (i, rec) in data.records.iter().enumerate() {
        let image = rec.binarize();
        let label = rec.label as usize;
        let oracle = (engine != EngineChoice::Simc)
            .then(|| net.run(&image, &mut OracleBackend, None))
            .transpose()
            .map_err(config_err)?;
        let hw = simc.as_mut().map(|b| net.run(&image, b, None)).transpose().map_err(config_err)?;
        let mut row = vec![i.to_string(), label.to_string()];
        if let Some(o) = &oracle {
            right_oracle += usize::from(o.class == label);
            row.push(o.class.to_string());
        }
        if let Some(s) = &hw {
            right_simc += usize::from(s.class == label);
            row.push(s.class.to_string());
        }
        if let (Some(o), Some(s)) = (&oracle, &hw) {
            if let Some(layer) = o.first_divergence(s) {
                let kind = net.topology.layers.get(layer).map_or("?".to_string(), |l| l.kind.to_string());
                let _ = writeln!(out.stderr, "divergence: image {i}, first differing layer {layer} ({kind})");
                out.code = EXIT_DIVERGENCE;
            }
        }
        t.push(row);
    }

    let n = data.len().max(1) as f64;
    if format == Format::Csv {
        out.stdout.push_str(&t.csv());
    }
    let _ = writeln!(out.stdout, "images: {}", data.len());
    if engine != EngineChoice::Simc {
        let _ = writeln!(out.stdout, "oracle accuracy: {:.4}", right_oracle as f64 / n);
    }
    if engine != EngineChoice::Oracle {
        let _ = writeln!(out.stdout, "simc accuracy: {:.4}", right_simc as f64 / n);
    }
    if engine == EngineChoice::Both {
        let verdict = if out.code == EXIT_OK { "agree at every layer" } else { "DIVERGE" };
        let _ = writeln!(out.stdout, "engines: {verdict}");
    }
    out.files.push(("predictions.csv".into(), t.csv().into_bytes()));
    Ok(out)
}

fn shape(l: &skysim_core::bnn::LayerSpec) -> String {
    let (w, h, c) = l.output_shape();
    format!("{w}x{h}x{c}")
}

pub fn report_table(r: &Rollup, topo: &BnnTopology) -> Table {
    let mut t = Table::new(["layer", "kind", "output", "xor", "or", "and", "popcounts", "energy_mj", "latency_ms"]);
    for (l, spec) in r.layers.iter().zip(&topo.layers) {
        t.push([
            (l.index + 1).to_string(),
            l.kind.to_string(),
            shape(spec),
            l.ops.xor.to_string(),
            l.ops.or.to_string(),
            l.ops.and.to_string(),
            l.ops.popcounts.to_string(),
            format!("{:.6}", l.energy_mj()),
            format!("{:.6}", l.latency_ms()),
        ]);
    }
    t.push([
        "total".to_string(),
        "-".into(),
        "-".into(),
        r.layers.iter().map(|l| l.ops.xor).sum::<u64>().to_string(),
        r.layers.iter().map(|l| l.ops.or).sum::<u64>().to_string(),
        r.layers.iter().map(|l| l.ops.and).sum::<u64>().to_string(),
        r.layers.iter().map(|l| l.ops.popcounts).sum::<u64>().to_string(),
        format!("{:.6}", r.energy_mj()),
        format!("{:.6}", r.latency_ms()),
    ]);
    t
}

pub fn cmd_report(
    cfg: &SimConfig,
    topology: Option<&Path>,
    ledger: Option<&Path>,
    sweep: Option<(MaterialParam, f64)>,
    format: Format,
) -> Result<Outcome, CliError> {
    let topo = load_topology(topology)?;
    let mut notes = Vec::new();
    let base = match ledger {
        Some(p) => {
            notes.push(format!("ledger: {}", p.display()));
            CostLedger::load(p).map_err(config_err)?
        }
        None => {
            notes.push("ledger: calibrated in memory against the configured headline on the reference topology".into());
            let fixed = CostLedger::with_fixed_popcount(&cfg.peripherals);
            calibrate(cfg.headline.target(), &BnnTopology::vgg_like_12(), &cfg.hardware, &fixed, &cfg.calibration)
                .map_err(config_err)?
                .ledger
        }
    };
    let ledger = match sweep {
        Some((param, delta)) => {
            let (e, s) = cfg.sweep.lookup(param, delta).map_err(config_err)?;
            notes.push(format!("sweep {param} {delta:+}: skyrmionic energy x{e:.4}, skyrmionic speedup {s:.4}x"));
            apply_material_sweep(&base, param, delta, &cfg.sweep).map_err(config_err)?
        }
        None => base,
    };
    let r = rollup(&topo, &ledger, &cfg.hardware).map_err(config_err)?;
    let t = report_table(&r, &topo);

    for p in Primitive::ALL {
        if let Ok(e) = ledger.get(p) {
            notes.push(format!("{p}: {:.6} pJ, {:.6} ns [{}]", e.energy_pj, e.latency_ns, e.provenance));
        }
    }
    notes.push(format!(
        "hardware: {} arrays/layer x {} cells, {} popcount banks/array, layers serial",
        cfg.hardware.simc_units_per_layer, cfg.hardware.cells_per_unit, cfg.hardware.popcount_banks_per_unit
    ));
    notes.push("totals include popcount and comparator energy (inclusion in the headline is assumed)".into());
    notes.push("per-layer split is a model output, not a reproduction of published per-layer values".into());

    let mut out = Outcome::default();
    let summary = format!(
        "energy_mj {:.6}\nlatency_ms {:.6}\nthroughput_images_per_s {:.3}\nskyrmionic_energy_mj {:.6}\n",
        r.energy_mj(),
        r.latency_ms(),
        r.throughput(),
        r.skyrmionic_energy_mj()
    );
    out.stdout.push_str(&t.render(format));
    out.stdout.push_str(&summary);
    out.stdout.push_str(&footnotes(&notes));

    if sweep.is_none() && topo.layers == BnnTopology::vgg_like_12().layers {
        let h = &cfg.headline;
        let e_ok = (r.energy_mj() / h.energy_mj - 1.0).abs() <= h.tolerance;
        let l_ok = (r.latency_ms() / h.latency_ms - 1.0).abs() <= h.tolerance;
        let t_ok = (r.throughput() - h.throughput_images_per_s).abs() <= 0.1;
        if e_ok && l_ok && t_ok {
            let _ = writeln!(out.stdout, "headline check: ok");
        } else {
            let _ = writeln!(
                out.stderr,
                "drift: totals {:.4} mJ / {:.4} ms / {:.2} img/s vs headline {} mJ / {} ms / {} img/s",
                r.energy_mj(),
                r.latency_ms(),
                r.throughput(),
                h.energy_mj,
                h.latency_ms,
                h.throughput_images_per_s
            );
            out.code = EXIT_DRIFT;
        }
    }

    let mut csv = t.csv();
    csv.push_str(&footnotes(&summary.lines().map(String::from).collect::<Vec<_>>()));
    csv.push_str(&footnotes(&notes));
    out.files.push(("report.csv".into(), csv.into_bytes()));
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_faults(
    _cfg: &SimConfig,
    topology: &Path,
    weights: &Path,
    dataset: &Path,
    rates: &[f64],
    spec: &FaultSpec,
    trials: usize,
    limit: Option<usize>,
    format: Format,
) -> Result<Outcome, CliError> {
    let net = load_network(topology, weights)?;
    let data = load_dataset(dataset, net.topology.num_classes(), limit)?.binarized();
    let report = accuracy_sweep(&net, &data, rates, spec, trials).map_err(config_err)?;
    let csv = report.to_csv();
    let mut out = Outcome::default();
    match format {
        Format::Csv => out.stdout.push_str(&csv),
        Format::Table => {
            let mut t = Table::new(["rate", "mean_error", "stddev", "trials"]);
            for line in csv.lines().skip(2) {
                t.push(line.split(',').map(String::from).collect::<Vec<_>>());
            }
            out.stdout.push_str(csv.lines().next().unwrap_or_default());
            out.stdout.push('\n');
            out.stdout.push_str(&t.aligned());
        }
    }
    out.files.push(("faults.csv".into(), csv.into_bytes()));
    Ok(out)
}

pub fn cmd_waves(
    cfg: &SimConfig,
    x_min: f64,
    x_max: f64,
    steps: usize,
    t_ns: f64,
    distance: Option<f64>,
    format: Format,
) -> Result<Outcome, CliError> {
    if steps < 2 || x_max.partial_cmp(&x_min) != Some(std::cmp::Ordering::Greater) {
        return Err(CliError::Config("waves needs steps >= 2 and x_max_nm > x_min_nm".into()));
    }
    let wp = cfg.wave();
    let d = distance.unwrap_or(cfg.geometry.input_to_output_nm);
    let phase = scatter_phase(wp.wave_vector_per_nm, d, cfg.material.skyrmion_radius_nm);
    let mut t = Table::new(["x_nm", "t_ns", "amplitude"]);
    for i in 0..steps {
        let x = x_min + (x_max - x_min) * i as f64 / (steps - 1) as f64;
        t.push([format!("{x:.3}"), format!("{t_ns:.3}"), format!("{:.9}", total_wave(&wp, x, t_ns, phase))]);
    }
    let mut out = Outcome { stdout: t.render(format), ..Outcome::default() };
    let _ = writeln!(
        out.stdout,
        "# distance {d} nm, scatter phase {phase:.6} rad; fitting constants are uncalibrated placeholders"
    );
    out.files.push(("waves.csv".into(), t.csv().into_bytes()));
    Ok(out)
}

pub fn cmd_dump_array(cfg: &SimConfig, gate: Gate, cells: usize, seed: u64) -> Result<Outcome, CliError> {
    let mut array = SimcArray::new(cfg.array, cfg.device()).map_err(config_err)?;
    if cells > array.len() {
        return Err(CliError::Config(format!("array holds {} cells, asked for {cells}", array.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut wrong = 0usize;
    for i in 0..cells {
        let (a, b) = (rng.gen::<bool>(), rng.gen::<bool>());
        array.write(i, Region::A, a).map_err(config_err)?;
        array.write(i, Region::B, b).map_err(config_err)?;
        let o = array.compute(i, gate).map_err(config_err)?;
        wrong += usize::from(o.output != gate.eval(a, b));
    }
    let mut out = Outcome::default();
    let _ = writeln!(out.stdout, "# {gate} on {cells} cells (seed {seed}); each cell is A B O1 O2");
    let dump = array.dump();
    out.stdout.push_str(&dump);
    let _ = writeln!(out.stdout, "# truth-table mismatches: {wrong}");
    if wrong > 0 {
        out.code = EXIT_DRIFT;
    }
    out.files.push(("array.txt".into(), dump.into_bytes()));
    Ok(out)
}

pub fn cmd_calibrate(cfg: &SimConfig, topology: Option<&Path>) -> Result<Outcome, CliError> {
    let topo = load_topology(topology)?;
    let fixed = CostLedger::with_fixed_popcount(&cfg.peripherals);
    let cal = calibrate(cfg.headline.target(), &topo, &cfg.hardware, &fixed, &cfg.calibration).map_err(config_err)?;
    let text = cal.ledger.to_toml_string();
    Ok(Outcome { stdout: text.clone(), files: vec![("ledger.toml".into(), text.into_bytes())], ..Outcome::default() })
}
