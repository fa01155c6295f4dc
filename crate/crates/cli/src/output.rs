//! Result files: CSV tables, the run manifest and the output directory
//! policy.

use std::fs;
use std::path::{Path, PathBuf};

use holstein_core::dynamics::Trajectory;
use holstein_core::transport::{CrossoverReport, EfficiencyCurve};
use holstein_core::walks::WalkDistribution;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const TRAJECTORY_CSV: &str = "trajectory.csv";
pub const MSD_CSV: &str = "msd.csv";
pub const SWEEP_CSV: &str = "sweep.csv";
pub const CROSSOVER_CSV: &str = "crossover.csv";
pub const WALK_CLASSICAL_CSV: &str = "walk_classical.csv";
pub const WALK_QUANTUM_CSV: &str = "walk_quantum.csv";
pub const WALK_SUMMARY_CSV: &str = "walk_summary.csv";
pub const MANIFEST_JSON: &str = "manifest.json";
pub const SCENARIO_TOML: &str = "scenario.toml";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Shortest round-trip decimal; exponent form outside `[1e-4, 1e15)`.
pub fn fmt_real(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "inf".to_owned(), fmt_real)
}

/// Creates `dir`, refusing to reuse a non-empty one unless `force`.
pub fn prepare_dir(dir: &Path, force: bool) -> Result<(), CliError> {
    if dir.exists() {
        let mut entries = fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?;
        if entries.next().is_some() && !force {
            return Err(CliError::Refused(format!(
                "output directory {} is not empty; pass --force to overwrite",
                dir.display()
            )));
        }
    }
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// `<root>/<name>-<first 12 hex digits of key>`, root from `HOLSTEIN_OUT_ROOT`
/// or `./out`.
pub fn default_dir(root: Option<&Path>, name: &str, key: &str) -> PathBuf {
    let root = root.map_or_else(|| PathBuf::from("out"), Path::to_path_buf);
    root.join(format!("{name}-{}", &sha256_hex(key.as_bytes())[..12]))
}

struct Table {
    path: PathBuf,
    writer: csv::Writer<fs::File>,
}

impl Table {
    fn create(path: PathBuf, header: &[String]) -> Result<Self, CliError> {
        let mut writer = csv::Writer::from_path(&path).map_err(|e| CliError::csv(&path, e))?;
        writer.write_record(header).map_err(|e| CliError::csv(&path, e))?;
        Ok(Self { path, writer })
    }

    fn row(&mut self, fields: &[String]) -> Result<(), CliError> {
        self.writer.write_record(fields).map_err(|e| CliError::csv(&self.path, e))
    }

    fn finish(mut self) -> Result<(), CliError> {
        self.writer.flush().map_err(|e| CliError::io(&self.path, e))
    }
}

fn owned(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// `t, pop_0 … pop_{N−1}, l1_coherence, trace, sink_captured`.
pub fn write_trajectory(path: PathBuf, traj: &Trajectory<f64>) -> Result<(), CliError> {
    let mut header = vec!["t".to_owned()];
    header.extend((0..traj.n_sites()).map(|i| format!("pop_{i}")));
    header.extend(owned(&["l1_coherence", "trace", "sink_captured"]));
    let mut t = Table::create(path, &header)?;
    for r in traj.records() {
        let mut row = vec![fmt_real(r.time)];
        row.extend(r.populations.iter().map(|&p| fmt_real(p)));
        row.extend([fmt_real(r.coherence_l1), fmt_real(r.trace), fmt_real(r.sink_captured)]);
        t.row(&row)?;
    }
    t.finish()
}

pub fn write_msd(path: PathBuf, msd: &[(f64, f64)]) -> Result<(), CliError> {
    let mut t = Table::create(path, &owned(&["t", "msd"]))?;
    for &(time, m) in msd {
        t.row(&[fmt_real(time), fmt_real(m)])?;
    }
    t.finish()
}

/// `gamma, eta, t50`; `t50` is `inf` when the threshold was never reached.
pub fn write_sweep(path: PathBuf, curve: &EfficiencyCurve<f64>) -> Result<(), CliError> {
    let mut t = Table::create(path, &owned(&["gamma", "eta", "t50"]))?;
    for p in &curve.points {
        t.row(&[fmt_real(p.parameter), fmt_real(p.eta), fmt_opt(p.t_threshold)])?;
    }
    t.finish()
}

pub fn write_crossover(path: PathBuf, report: &CrossoverReport<f64>) -> Result<(), CliError> {
    let mut t = Table::create(path, &owned(&["gamma", "alpha", "residual"]))?;
    for p in &report.points {
        t.row(&[fmt_real(p.gamma), fmt_real(p.exponent), fmt_real(p.residual)])?;
    }
    t.finish()
}

/// `position, probability` over the full support `−M..=M`.
pub fn write_walk(path: PathBuf, walk: &WalkDistribution<f64>) -> Result<(), CliError> {
    let mut t = Table::create(path, &owned(&["position", "probability"]))?;
    for (pos, p) in walk.iter() {
        t.row(&[pos.to_string(), fmt_real(p)])?;
    }
    t.finish()
}

pub fn write_walk_summary(path: PathBuf, rows: &[(&str, usize, f64)]) -> Result<(), CliError> {
    let mut t = Table::create(path, &owned(&["kind", "M", "stddev"]))?;
    for &(kind, steps, sd) in rows {
        t.row(&[kind.to_owned(), steps.to_string(), fmt_real(sd)])?;
    }
    t.finish()
}

pub fn write_text(path: PathBuf, text: &str) -> Result<(), CliError> {
    fs::write(&path, text).map_err(|e| CliError::io(&path, e))
}

/// Everything needed to repeat a run.
#[derive(Debug, Clone, Serialize, serde::Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// SHA-256 of the bytes the run was started from.
    pub input_sha256: String,
    /// Scenario with all defaults filled in; absent for flag-only commands.
    pub scenario: Option<String>,
    pub scenario_sha256: Option<String>,
    /// Flag values for commands without a scenario file.
    pub arguments: serde_json::Map<String, serde_json::Value>,
    pub seeds: Vec<u64>,
    pub spectral_family: Option<String>,
    pub method: Option<String>,
    pub jobs: usize,
    pub outputs: Vec<String>,
    pub warnings: Vec<String>,
    pub wall_time_seconds: f64,
}

impl Manifest {
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let path = dir.join(MANIFEST_JSON);
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        write_text(path, &(text + "\n"))
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| {
            holstein_core::Error::invalid("manifest", format!("{}: {e}", path.display())).into()
        })
    }
}
