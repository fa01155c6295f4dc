use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use holstein_cli::error::CliError;
use holstein_cli::output;
use holstein_cli::presets::{self, PRESETS};
use holstein_cli::run::{
    self, CoinState, MemoryArgs, RunOptions, RunReport, ScenarioCommand, WalkArgs, WalkKind,
};
use holstein_core::Error;

/// Exciton transport on tight-binding networks with vibrational baths,
/// dephasing and traps.
#[derive(Parser)]
#[command(name = "holstein", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct OutArgs {
    /// Output directory (default: <out-root>/<name>-<hash>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Root for default output directories.
    #[arg(long, env = "HOLSTEIN_OUT_ROOT")]
    out_root: Option<PathBuf>,
    /// Write into a non-empty output directory.
    #[arg(long)]
    force: bool,
    /// Worker threads for sweeps (0 = all cores).
    #[arg(long, env = "HOLSTEIN_JOBS", default_value_t = 0)]
    jobs: usize,
}

impl OutArgs {
    fn options(&self) -> RunOptions {
        RunOptions {
            out: self.out.clone(),
            out_root: self.out_root.clone(),
            force: self.force,
            jobs: self.jobs,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evolve one scenario and write its trajectory.
    Simulate {
        /// Scenario file, or a preset name prefixed with `preset:`.
        scenario: String,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Transfer efficiency across a grid of dephasing rates.
    SweepDephasing {
        scenario: String,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Width exponent of a spreading packet across dephasing rates.
    Crossover {
        scenario: String,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Classical and coined quantum walks on a line.
    Walk {
        #[arg(long)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = KindArg::Both)]
        kind: KindArg,
        /// Initial coin state of the quantum walk.
        #[arg(long, value_enum, default_value_t = CoinArg::Symmetric)]
        coin_state: CoinArg,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Classical memory needed to store a state vector.
    Memory {
        #[arg(long)]
        qubits: Option<u32>,
        /// Largest qubit count whose state fits in this many bits.
        #[arg(long)]
        budget_bits: Option<u128>,
        /// Size a site x Fock product basis instead.
        #[arg(long)]
        sites: Option<usize>,
        /// Comma-separated Fock cutoffs, one per mode.
        #[arg(long, value_delimiter = ',')]
        cutoffs: Vec<usize>,
        #[arg(long, default_value_t = 32)]
        bits_per_component: u32,
    },
    /// Repeat the run recorded in a manifest.
    Rerun {
        manifest: PathBuf,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Built-in scenarios.
    Preset {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    List,
    Show { name: String },
    /// Copy a preset to a file.
    Write {
        name: String,
        #[arg(long)]
        to: Option<PathBuf>,
        #[arg(long)]
        force: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Classical,
    Quantum,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum CoinArg {
    Symmetric,
    Zero,
}

fn preset_text(name: &str) -> Result<&'static str, CliError> {
    presets::find(name).map(|p| p.text).ok_or_else(|| {
        let known: Vec<_> = PRESETS.iter().map(|p| p.name).collect();
        Error::invalid("preset", format!("unknown preset `{name}` (known: {})", known.join(", "))).into()
    })
}

fn read_scenario(arg: &str) -> Result<String, CliError> {
    match arg.strip_prefix("preset:") {
        Some(name) => preset_text(name).map(str::to_owned),
        None => fs::read_to_string(arg).map_err(|e| CliError::io(Path::new(arg), e)),
    }
}

fn report(r: &RunReport) {
    for w in &r.manifest.warnings {
        eprintln!("warning: {w}");
    }
    println!("{}", r.dir.display());
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let scenario_cmd = |c: ScenarioCommand, path: &str, out: &OutArgs| -> Result<(), CliError> {
        let text = read_scenario(path)?;
        report(&run::run_scenario(c, &text, &out.options())?);
        Ok(())
    };
    match cli.command {
        Command::Simulate { scenario, out } => scenario_cmd(ScenarioCommand::Simulate, &scenario, &out),
        Command::SweepDephasing { scenario, out } => {
            scenario_cmd(ScenarioCommand::SweepDephasing, &scenario, &out)
        }
        Command::Crossover { scenario, out } => scenario_cmd(ScenarioCommand::Crossover, &scenario, &out),
        Command::Walk {
            steps,
            kind,
            coin_state,
            out,
        } => {
            let args = WalkArgs {
                steps,
                kind: match kind {
                    KindArg::Classical => WalkKind::Classical,
                    KindArg::Quantum => WalkKind::Quantum,
                    KindArg::Both => WalkKind::Both,
                },
                coin: match coin_state {
                    CoinArg::Symmetric => CoinState::Symmetric,
                    CoinArg::Zero => CoinState::Zero,
                },
            };
            report(&run::run_walk(&args, &out.options())?);
            Ok(())
        }
        Command::Memory {
            qubits,
            budget_bits,
            sites,
            cutoffs,
            bits_per_component,
        } => {
            let lines = run::memory_report(&MemoryArgs {
                qubits,
                budget_bits,
                sites,
                cutoffs,
                bits_per_component,
            })?;
            for l in lines {
                println!("{l}");
            }
            Ok(())
        }
        Command::Rerun { manifest, out } => {
            report(&run::rerun(&manifest, &out.options())?);
            Ok(())
        }
        Command::Preset { action } => match action {
            PresetAction::List => {
                for p in PRESETS {
                    println!("{}", p.name);
                }
                Ok(())
            }
            PresetAction::Show { name } => {
                print!("{}", preset_text(&name)?);
                Ok(())
            }
            PresetAction::Write { name, to, force } => {
                let text = preset_text(&name)?;
                let path = to.unwrap_or_else(|| PathBuf::from(format!("{name}.toml")));
                if path.exists() && !force {
                    return Err(CliError::Refused(format!(
                        "{} exists; pass --force to overwrite",
                        path.display()
                    )));
                }
                output::write_text(path.clone(), text)?;
                println!("{}", path.display());
                Ok(())
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let mut err = std::io::stderr().lock();
            let _ = writeln!(err, "{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
