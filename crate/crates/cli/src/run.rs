//! Command implementations behind the binary. Each returns the output
//! directory and manifest; printing is left to the caller.

use std::path::{Path, PathBuf};
use std::time::Instant;

use holstein_core::dynamics::{evolve_open, evolve_unitary, Trajectory};
use holstein_core::error::{Error, Result};
use holstein_core::memory::{
    format_bits_as_bytes, max_qubits, product_basis_bits, qubit_state_bits, MemoryModel,
};
use holstein_core::model::{
    build_system_hamiltonian, build_total_hamiltonian_limited, ProductBasis,
};
use holstein_core::transport::{
    crossover_scan, mean_squared_displacement, sweep_dephasing, CrossoverSetup, OpenScenario,
};
use holstein_core::walks::{classical_walk, quantum_walk, CoinSpec};
use serde_json::{json, Map, Value};

use crate::error::CliError;
use crate::output::{self, Manifest};
use crate::scenario::{parse_scenario, require_sink, serialize_doc, Scenario};

/// Where and how results are written.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Explicit output directory; overrides every default.
    pub out: Option<PathBuf>,
    /// Root for default directories (`./out` when absent).
    pub out_root: Option<PathBuf>,
    pub force: bool,
    /// Worker threads for sweeps; 0 uses every core.
    pub jobs: usize,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub dir: PathBuf,
    pub manifest: Manifest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioCommand {
    Simulate,
    SweepDephasing,
    Crossover,
}

impl ScenarioCommand {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Simulate => "simulate",
            Self::SweepDephasing => "sweep-dephasing",
            Self::Crossover => "crossover",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WalkKind {
    Classical,
    Quantum,
    Both,
}

impl WalkKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Classical => "classical",
            Self::Quantum => "quantum",
            Self::Both => "both",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s {
            "classical" => Ok(Self::Classical),
            "quantum" => Ok(Self::Quantum),
            "both" => Ok(Self::Both),
            _ => Err(Error::invalid("walk.kind", format!("unknown kind `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoinState {
    /// `(|0⟩ + i|1⟩)/√2`.
    Symmetric,
    /// `|0⟩`.
    Zero,
}

impl CoinState {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Symmetric => "symmetric",
            Self::Zero => "zero",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s {
            "symmetric" => Ok(Self::Symmetric),
            "zero" => Ok(Self::Zero),
            _ => Err(Error::invalid("walk.coin_state", format!("unknown coin state `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct WalkArgs {
    pub steps: usize,
    pub kind: WalkKind,
    pub coin: CoinState,
}

struct Output<'a> {
    dir: &'a Path,
    files: Vec<String>,
}

impl Output<'_> {
    fn path(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_owned());
        self.dir.join(name)
    }
}

fn resolve_dir(opts: &RunOptions, preferred: Option<&Path>, name: &str, key: &str) -> PathBuf {
    opts.out
        .clone()
        .or_else(|| preferred.map(Path::to_path_buf))
        .unwrap_or_else(|| output::default_dir(opts.out_root.as_deref(), name, key))
}

fn base_manifest(command: &str, input: &[u8]) -> Manifest {
    Manifest {
        tool: env!("CARGO_PKG_NAME").to_owned(),
        version: env!("CARGO_PKG_VERSION").to_owned(),
        command: command.to_owned(),
        input_sha256: output::sha256_hex(input),
        scenario: None,
        scenario_sha256: None,
        arguments: Map::new(),
        seeds: Vec::new(),
        spectral_family: None,
        method: None,
        jobs: 0,
        outputs: Vec::new(),
        warnings: Vec::new(),
        wall_time_seconds: 0.0,
    }
}

fn simulate_trajectory(s: &Scenario) -> Result<Trajectory<f64>> {
    match &s.bath {
        Some(bath) => {
            let basis = ProductBasis::new(s.network.n_sites(), bath.cutoffs())?;
            let h = build_total_hamiltonian_limited(&s.network, bath, &basis, s.max_dim)?;
            let psi0 = s.initial_pure(&basis)?;
            evolve_unitary(&h, &psi0, &s.integrator)
        }
        None => {
            let h = build_system_hamiltonian(&s.network);
            let rho0 = s.initial_density()?;
            evolve_open(&h, &s.channels, &rho0, &s.integrator)
        }
    }
}

fn require_bath_free(s: &Scenario, command: &str) -> Result<()> {
    if s.bath.is_some() {
        return Err(Error::invalid(
            "bath",
            format!("{command} runs on the bath-free site model; remove the [bath] block"),
        ));
    }
    Ok(())
}

/// Runs `command` on scenario text.
pub fn run_scenario(command: ScenarioCommand, text: &str, opts: &RunOptions) -> Result<RunReport, CliError> {
    let started = Instant::now();
    let s = parse_scenario(text)?;
    let name = command.as_str();
    let materialized = s.materialized(command == ScenarioCommand::SweepDephasing)?;
    let canonical = serialize_doc(&materialized);
    let dir = resolve_dir(opts, s.output_dir.as_deref(), s.name(), &format!("{name}\n{canonical}"));

    let mut m = base_manifest(name, text.as_bytes());
    m.scenario_sha256 = Some(output::sha256_hex(canonical.as_bytes()));
    m.scenario = Some(canonical.clone());
    m.seeds = s.seeds();
    m.spectral_family = s.spectral_family().map(str::to_owned);
    m.jobs = opts.jobs;
    m.method = materialized.integrator.method.clone();

    // All numerical work happens before anything touches the disk.
    enum Computed {
        Simulate(Trajectory<f64>, Option<Vec<(f64, f64)>>),
        Sweep(holstein_core::transport::EfficiencyCurve<f64>),
        Crossover(holstein_core::transport::CrossoverReport<f64>),
    }
    let result = match command {
        ScenarioCommand::Simulate => {
            let traj = simulate_trajectory(&s)?;
            let msd = match s.origin_site {
                Some(o) => Some(mean_squared_displacement(&traj, s.network.coordinates(), o)?),
                None => None,
            };
            Computed::Simulate(traj, msd)
        }
        ScenarioCommand::SweepDephasing => {
            require_bath_free(&s, name)?;
            require_sink(&s)?;
            let scenario = OpenScenario {
                network: s.network.clone(),
                channels: s.channels.clone(),
                initial: s.initial_density()?,
                integrator: s.integrator.clone(),
                threshold: s.capture_threshold,
            };
            Computed::Sweep(sweep_dephasing(&scenario, &s.sweep_gammas()?, opts.jobs)?)
        }
        ScenarioCommand::Crossover => {
            require_bath_free(&s, name)?;
            let Some(c) = &s.doc.crossover else {
                return Err(Error::invalid("crossover", "missing [crossover] block with a gamma grid").into());
            };
            if !s.channels.hops.is_empty() {
                return Err(Error::invalid(
                    "channel.hops",
                    "the crossover scan sets its own uniform dephasing; remove incoherent hops",
                )
                .into());
            }
            let origin = s
                .origin_site
                .or(s.initial_site())
                .ok_or_else(|| Error::invalid("observables.origin_site", "needed for the crossover scan"))?;
            let (lo, hi) = s.crossover_window();
            let mut integrator = s.integrator.clone();
            integrator.t_final = hi;
            let setup = CrossoverSetup {
                network: s.network.clone(),
                origin_site: origin,
                window: (lo, hi),
                integrator,
            };
            setup.validate()?;
            Computed::Crossover(crossover_scan(&setup, &c.gammas, opts.jobs)?)
        }
    };

    output::prepare_dir(&dir, opts.force)?;
    let mut out = Output { dir: &dir, files: Vec::new() };
    match &result {
        Computed::Simulate(traj, msd) => {
            output::write_trajectory(out.path(output::TRAJECTORY_CSV), traj)?;
            if let Some(msd) = msd {
                output::write_msd(out.path(output::MSD_CSV), msd)?;
            }
        }
        Computed::Sweep(curve) => output::write_sweep(out.path(output::SWEEP_CSV), curve)?,
        Computed::Crossover(report) => {
            output::write_crossover(out.path(output::CROSSOVER_CSV), report)?;
            m.warnings = report.warnings.clone();
        }
    }
    output::write_text(out.path(output::SCENARIO_TOML), &canonical)?;
    m.outputs = out.files;
    m.wall_time_seconds = started.elapsed().as_secs_f64();
    m.write(&dir)?;
    Ok(RunReport { dir, manifest: m })
}

fn walk_arguments(a: &WalkArgs) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("steps".into(), json!(a.steps));
    m.insert("kind".into(), json!(a.kind.as_str()));
    m.insert("coin_state".into(), json!(a.coin.as_str()));
    m
}

pub fn run_walk(args: &WalkArgs, opts: &RunOptions) -> Result<RunReport, CliError> {
    let started = Instant::now();
    let arguments = walk_arguments(args);
    let key = Value::Object(arguments.clone()).to_string();
    let dir = resolve_dir(opts, None, &format!("walk-{}", args.kind.as_str()), &key);

    let classical = match args.kind {
        WalkKind::Classical | WalkKind::Both => Some(classical_walk::<f64>(args.steps)?),
        WalkKind::Quantum => None,
    };
    let quantum = match args.kind {
        WalkKind::Quantum | WalkKind::Both => {
            let coin = match args.coin {
                CoinState::Symmetric => CoinSpec::hadamard_symmetric(),
                CoinState::Zero => CoinSpec::hadamard_zero(),
            };
            Some(quantum_walk::<f64>(args.steps, &coin)?)
        }
        WalkKind::Classical => None,
    };

    output::prepare_dir(&dir, opts.force)?;
    let mut out = Output { dir: &dir, files: Vec::new() };
    let mut summary = Vec::new();
    if let Some(w) = &classical {
        output::write_walk(out.path(output::WALK_CLASSICAL_CSV), w)?;
        summary.push(("classical", args.steps, w.std_dev()));
    }
    if let Some(w) = &quantum {
        output::write_walk(out.path(output::WALK_QUANTUM_CSV), w)?;
        summary.push(("quantum", args.steps, w.std_dev()));
    }
    output::write_walk_summary(out.path(output::WALK_SUMMARY_CSV), &summary)?;

    let mut m = base_manifest("walk", key.as_bytes());
    m.arguments = arguments;
    m.outputs = out.files;
    m.wall_time_seconds = started.elapsed().as_secs_f64();
    m.write(&dir)?;
    Ok(RunReport { dir, manifest: m })
}

#[derive(Debug, Clone, Default)]
pub struct MemoryArgs {
    pub qubits: Option<u32>,
    pub budget_bits: Option<u128>,
    /// Sites and per-mode Fock cutoffs of a product basis to size.
    pub sites: Option<usize>,
    pub cutoffs: Vec<usize>,
    pub bits_per_component: u32,
}

/// Report lines for the `memory` command.
pub fn memory_report(a: &MemoryArgs) -> Result<Vec<String>> {
    let model = MemoryModel::new(a.bits_per_component)?;
    let mut lines = Vec::new();
    if let Some(n) = a.qubits {
        let bits = qubit_state_bits(n, model)?;
        lines.push(format!("{n} qubits: {bits} bits ({})", format_bits_as_bytes(bits)));
    }
    if let Some(budget) = a.budget_bits {
        let n = max_qubits(budget, model)?;
        lines.push(format!(
            "budget {budget} bits ({}): at most {n} qubits",
            format_bits_as_bytes(budget)
        ));
    }
    if let Some(sites) = a.sites {
        let basis = ProductBasis::new(sites, a.cutoffs.clone())?;
        let bits = product_basis_bits(&basis, model)?;
        lines.push(format!(
            "{sites} sites x {} modes (dimension {}): {bits} bits ({})",
            basis.n_modes(),
            basis.total_dim(),
            format_bits_as_bytes(bits)
        ));
    } else if !a.cutoffs.is_empty() {
        return Err(Error::invalid("memory.cutoffs", "cutoffs need --sites"));
    }
    if lines.is_empty() {
        return Err(Error::invalid("memory", "give --qubits, --budget-bits or --sites"));
    }
    Ok(lines)
}

/// Repeats the run recorded in a manifest.
pub fn rerun(manifest_path: &Path, opts: &RunOptions) -> Result<RunReport, CliError> {
    let m = Manifest::read(manifest_path)?;
    let mut opts = opts.clone();
    opts.jobs = if opts.jobs == 0 { m.jobs } else { opts.jobs };
    let command = match m.command.as_str() {
        "simulate" => Some(ScenarioCommand::Simulate),
        "sweep-dephasing" => Some(ScenarioCommand::SweepDephasing),
        "crossover" => Some(ScenarioCommand::Crossover),
        "walk" => None,
        other => {
            return Err(Error::invalid("manifest.command", format!("cannot repeat `{other}`")).into())
        }
    };
    match command {
        Some(c) => {
            let text = m
                .scenario
                .ok_or_else(|| Error::invalid("manifest.scenario", "missing scenario"))?;
            run_scenario(c, &text, &opts)
        }
        None => {
            let get = |k: &str| {
                m.arguments
                    .get(k)
                    .ok_or_else(|| Error::invalid(format!("manifest.arguments.{k}"), "missing"))
            };
            let steps = get("steps")?
                .as_u64()
                .ok_or_else(|| Error::invalid("manifest.arguments.steps", "not an integer"))?;
            let kind = WalkKind::parse(get("kind")?.as_str().unwrap_or_default())?;
            let coin = CoinState::parse(get("coin_state")?.as_str().unwrap_or_default())?;
            let args = WalkArgs {
                steps: steps as usize,
                kind,
                coin,
            };
            run_walk(&args, &opts)
        }
    }
}
