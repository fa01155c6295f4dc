//! Scenario files: a versioned TOML schema describing one experiment.
//!
//! Parsing happens in two stages. The text is first deserialized into the
//! plain document types below (syntax and type errors carry a line and
//! column), then [`Scenario::from_doc`] checks every cross-reference and
//! collects all problems before reporting them together.

use std::path::PathBuf;

use holstein_core::dynamics::{
    ChannelSpec, DensityMatrix, Hop, IntegratorConfig, KrylovOptions, Method, PureState,
};
use holstein_core::error::{Error, Issue, Issues, Result};
use holstein_core::model::{
    generate_disordered_network, BathSpec, Coupling, Distribution, Mode, ProductBasis, Sink,
    SiteNetwork, Topology, DEFAULT_MAX_DIM,
};
use holstein_core::scalar::Complex;
use holstein_core::transport::{
    default_fit_window, log_grid, DEFAULT_CAPTURE_THRESHOLD, DEFAULT_HORIZON_PER_COUPLING,
};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::spectral::{discretize_spectral_density, SpectralDensitySpec};

pub const SCHEMA_VERSION: u32 = 1;

const DEFAULT_SWEEP_RANGE: (f64, f64) = (1e-2, 1e3);
const DEFAULT_SWEEP_POINTS: usize = 11;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    pub schema_version: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub network: NetworkDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bath: Option<BathDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialDoc>,
    pub integrator: IntegratorDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observables: Option<ObservablesDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crossover: Option<CrossoverDoc>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energies: Option<Vec<f64>>,
    /// `[i, j, t_ij]` triples.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub couplings: Option<Vec<(usize, usize, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coordinates: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sink: Option<SinkDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorDoc {
    pub n_sites: usize,
    /// `chain`, `ring`, `complete` or `edges`.
    pub topology: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<[usize; 2]>>,
    pub energies: DistributionDoc,
    pub couplings: DistributionDoc,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DistributionDoc {
    Constant { value: f64 },
    Uniform { lo: f64, hi: f64 },
    Normal { mean: f64, sd: f64 },
}

impl From<DistributionDoc> for Distribution {
    fn from(d: DistributionDoc) -> Self {
        match d {
            DistributionDoc::Constant { value } => Distribution::Constant(value),
            DistributionDoc::Uniform { lo, hi } => Distribution::Uniform { lo, hi },
            DistributionDoc::Normal { mean, sd } => Distribution::Normal { mean, sd },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SinkDoc {
    pub site: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<Vec<ModeDoc>>,
    /// One row per site, one column per mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub couplings: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectral: Option<SpectralDensitySpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeDoc {
    pub frequency: f64,
    pub fock_cutoff: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RatesDoc {
    Uniform(f64),
    PerSite(Vec<f64>),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dephasing: Option<RatesDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hops: Option<Vec<HopDoc>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HopDoc {
    pub from: usize,
    pub to: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub site: Option<usize>,
    /// `[re, im]` per site; normalized on load.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    pub dt: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub krylov_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub krylov_max_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rk4_safety: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservablesDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin_site: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capture_threshold: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directory: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stride: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshots: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepDoc {
    /// Explicit grid; otherwise a logarithmic grid from the fields below.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gammas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub include_zero: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossoverDoc {
    pub gammas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    Site(usize),
    Amplitudes(DVector<Complex<f64>>),
}

/// A checked scenario. `doc` is kept verbatim so serialization reproduces
/// the input; the remaining fields are the resolved model objects.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub doc: ScenarioDoc,
    pub network: SiteNetwork<f64>,
    pub bath: Option<BathSpec<f64>>,
    pub max_dim: usize,
    pub channels: ChannelSpec<f64>,
    pub initial: InitialState,
    pub integrator: IntegratorConfig<f64>,
    pub origin_site: Option<usize>,
    pub capture_threshold: f64,
    pub output_dir: Option<PathBuf>,
}

fn locate(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |p| p + 1) + 1;
    (line, col)
}

fn syntax_error(text: &str, e: toml::de::Error) -> Error {
    let field = match e.span() {
        Some(span) => {
            let (line, col) = locate(text, span.start);
            format!("line {line}, column {col}")
        }
        None => "document".to_owned(),
    };
    Error::Validation(vec![Issue::new(field, e.message().trim().to_owned())])
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let table: toml::Table = toml::from_str(text).map_err(|e| syntax_error(text, e))?;
    match table.get("schema_version") {
        None => return Err(Error::invalid("schema_version", "missing schema version tag")),
        Some(toml::Value::Integer(v)) if *v == SCHEMA_VERSION as i64 => {}
        Some(v) => {
            return Err(Error::invalid(
                "schema_version",
                format!("unsupported schema version {v}; this build reads version {SCHEMA_VERSION}"),
            ))
        }
    }
    let doc: ScenarioDoc = toml::from_str(text).map_err(|e| syntax_error(text, e))?;
    Scenario::from_doc(doc)
}

pub fn serialize_doc(doc: &ScenarioDoc) -> String {
    toml::to_string(doc).expect("scenario documents always serialize")
}

fn resolve_network(doc: &NetworkDoc, issues: &mut Issues) -> Option<SiteNetwork<f64>> {
    let explicit = doc.energies.is_some() || doc.couplings.is_some();
    let net = match (&doc.generator, explicit) {
        (Some(_), true) => {
            issues.push("network", "give either explicit energies/couplings or a generator, not both");
            return None;
        }
        (None, false) => {
            issues.push("network", "needs explicit energies or a generator block");
            return None;
        }
        (None, true) => {
            let Some(energies) = doc.energies.clone() else {
                issues.push("network.energies", "missing on-site energies");
                return None;
            };
            let couplings = doc
                .couplings
                .iter()
                .flatten()
                .map(|&(i, j, t)| Coupling::new(i, j, t))
                .collect();
            issues.absorb(SiteNetwork::new(energies, couplings, None))?
        }
        (Some(g), false) => {
            let topology = match g.topology.as_str() {
                "chain" => Some(Topology::Chain),
                "ring" => Some(Topology::Ring),
                "complete" => Some(Topology::Complete),
                "edges" => match &g.edges {
                    Some(e) => Some(Topology::Edges(e.iter().map(|p| (p[0], p[1])).collect())),
                    None => {
                        issues.push("network.generator.edges", "topology `edges` needs an edge list");
                        None
                    }
                },
                other => {
                    issues.push(
                        "network.generator.topology",
                        format!("unknown topology `{other}` (chain, ring, complete, edges)"),
                    );
                    None
                }
            };
            if g.edges.is_some() && g.topology != "edges" {
                issues.push("network.generator.edges", "edge list given for a built-in topology");
            }
            let topology = topology?;
            issues.absorb(generate_disordered_network(
                g.n_sites,
                &topology,
                g.energies.into(),
                g.couplings.into(),
                g.seed,
            ))?
        }
    };
    let net = match &doc.coordinates {
        Some(c) => issues.absorb(net.with_coordinates(c.clone()))?,
        None => net,
    };
    match doc.sink {
        Some(s) => issues.absorb(net.with_sink(s.site, s.rate)),
        None => Some(net),
    }
}

fn resolve_bath(doc: &BathDoc, n: usize, issues: &mut Issues) -> Option<BathSpec<f64>> {
    match (&doc.spectral, &doc.modes) {
        (Some(_), Some(_)) => {
            issues.push("bath", "give either explicit modes or a spectral block, not both");
            None
        }
        (None, None) => {
            issues.push("bath", "needs explicit modes or a spectral block");
            None
        }
        (Some(spec), None) => {
            if doc.couplings.is_some() {
                issues.push("bath.couplings", "couplings come from the spectral density");
            }
            issues.absorb(discretize_spectral_density(spec, n))
        }
        (None, Some(modes)) => {
            let k = modes.len();
            let rows = match &doc.couplings {
                Some(r) => r.clone(),
                None => {
                    issues.push("bath.couplings", "missing coupling matrix");
                    return None;
                }
            };
            let mut ok = true;
            if rows.len() != n {
                issues.push("bath.couplings", format!("{} rows for {n} sites", rows.len()));
                ok = false;
            }
            for (i, r) in rows.iter().enumerate() {
                if r.len() != k {
                    issues.push(format!("bath.couplings[{i}]"), format!("{} entries for {k} modes", r.len()));
                    ok = false;
                }
            }
            if !ok {
                return None;
            }
            let g = DMatrix::from_fn(n, k, |i, j| rows[i][j]);
            let modes = modes.iter().map(|m| Mode::new(m.frequency, m.fock_cutoff)).collect();
            issues.absorb(BathSpec::new(modes, g))
        }
    }
}

fn resolve_channels(
    doc: Option<&ChannelDoc>,
    net: &SiteNetwork<f64>,
    issues: &mut Issues,
) -> Option<ChannelSpec<f64>> {
    let n = net.n_sites();
    let default = ChannelDoc::default();
    let doc = doc.unwrap_or(&default);
    let dephasing = match &doc.dephasing {
        None => vec![0.0; n],
        Some(RatesDoc::Uniform(g)) => vec![*g; n],
        Some(RatesDoc::PerSite(v)) => v.clone(),
    };
    let hops = doc
        .hops
        .iter()
        .flatten()
        .map(|h| Hop::new(h.from, h.to, h.rate))
        .collect();
    issues.absorb(ChannelSpec::new(dephasing, hops, net.sink()))
}

fn resolve_initial(doc: Option<&InitialDoc>, n: usize, issues: &mut Issues) -> Option<InitialState> {
    let default = InitialDoc::default();
    let doc = doc.unwrap_or(&default);
    match (doc.site, &doc.amplitudes) {
        (Some(_), Some(_)) => {
            issues.push("initial", "give either a site or amplitudes, not both");
            None
        }
        (site, None) => {
            let site = site.unwrap_or(0);
            if site >= n {
                issues.push("initial.site", format!("site {site} out of range for {n} sites"));
                return None;
            }
            Some(InitialState::Site(site))
        }
        (None, Some(a)) => {
            if a.len() != n {
                issues.push("initial.amplitudes", format!("{} amplitudes for {n} sites", a.len()));
                return None;
            }
            let v = DVector::from_iterator(n, a.iter().map(|z| Complex::new(z[0], z[1])));
            let norm = v.norm();
            if !(norm > 0.0 && norm.is_finite()) {
                issues.push("initial.amplitudes", "amplitudes must be finite and not all zero");
                return None;
            }
            Some(InitialState::Amplitudes(v / Complex::new(norm, 0.0)))
        }
    }
}

fn default_horizon(net: Option<&SiteNetwork<f64>>) -> f64 {
    let j = net.map_or(1.0, |n| n.max_coupling());
    DEFAULT_HORIZON_PER_COUPLING / if j > 0.0 { j } else { 1.0 }
}

fn resolve_integrator(
    doc: &ScenarioDoc,
    net: Option<&SiteNetwork<f64>>,
    issues: &mut Issues,
) -> Option<IntegratorConfig<f64>> {
    let d = &doc.integrator;
    let out = doc.output.clone().unwrap_or_default();
    let method = match d.method.as_deref() {
        None | Some("auto") => None,
        Some(m) => match m.parse::<Method>() {
            Ok(m) => Some(m),
            Err(_) => {
                issues.push(
                    "integrator.method",
                    format!("unknown method `{m}` (auto, krylov-expm, dense-expm, rk4)"),
                );
                return None;
            }
        },
    };
    let defaults = KrylovOptions::default();
    let mut cfg = IntegratorConfig::new(d.dt, d.t_final.unwrap_or_else(|| default_horizon(net)))
        .with_stride(out.stride.unwrap_or(1))
        .with_snapshots(out.snapshots.unwrap_or(false));
    cfg.method = method;
    cfg.krylov = KrylovOptions {
        tol: d.krylov_tol.unwrap_or(defaults.tol),
        max_dim: d.krylov_max_dim.unwrap_or(defaults.max_dim),
    };
    if let Some(s) = d.rk4_safety {
        cfg.rk4_safety = s;
    }
    issues.absorb(cfg.validate())?;
    Some(cfg)
}

fn check_grid(grid: &[f64], field: &str, issues: &mut Issues) {
    issues.check(!grid.is_empty(), field, "grid is empty");
    issues.check(
        grid.iter().all(|g| *g >= 0.0 && g.is_finite()),
        field,
        "rates must be nonnegative and finite",
    );
    issues.check(
        grid.windows(2).all(|w| w[1] > w[0]),
        field,
        "grid must be strictly increasing",
    );
}

impl Scenario {
    pub fn from_doc(doc: ScenarioDoc) -> Result<Self> {
        let mut issues = Issues::new();
        if doc.schema_version != SCHEMA_VERSION {
            return Err(Error::invalid(
                "schema_version",
                format!("unsupported schema version {}", doc.schema_version),
            ));
        }
        issues.check(!doc.name.trim().is_empty(), "name", "scenario name is empty");
        issues.check(
            doc.name.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)),
            "name",
            "use only ASCII letters, digits, '-', '_' and '.'",
        );

        let network = resolve_network(&doc.network, &mut issues);
        let n = network.as_ref().map(|n| n.n_sites());
        let bath = match (&doc.bath, n) {
            (Some(b), Some(n)) => resolve_bath(b, n, &mut issues),
            _ => None,
        };
        let channels = network
            .as_ref()
            .and_then(|net| resolve_channels(doc.channel.as_ref(), net, &mut issues));
        // Site count as declared, so later blocks are still checked when the
        // network itself is rejected.
        let declared = n
            .or(doc.network.energies.as_ref().map(Vec::len))
            .or(doc.network.generator.as_ref().map(|g| g.n_sites));
        let initial = declared.and_then(|n| resolve_initial(doc.initial.as_ref(), n, &mut issues));
        let integrator = resolve_integrator(&doc, network.as_ref(), &mut issues);

        let obs = doc.observables.clone().unwrap_or_default();
        if let (Some(o), Some(n)) = (obs.origin_site, declared) {
            issues.check(o < n, "observables.origin_site", format!("site {o} out of range for {n} sites"));
        }
        let capture_threshold = obs.capture_threshold.unwrap_or(DEFAULT_CAPTURE_THRESHOLD);
        issues.check(
            capture_threshold > 0.0 && capture_threshold <= 1.0,
            "observables.capture_threshold",
            "must lie in (0, 1]",
        );

        if let Some(s) = &doc.sweep {
            if let Some(g) = &s.gammas {
                check_grid(g, "sweep.gammas", &mut issues);
                issues.check(
                    s.gamma_min.is_none() && s.gamma_max.is_none() && s.points.is_none(),
                    "sweep",
                    "give either `gammas` or a logarithmic range, not both",
                );
            }
        }
        if let Some(c) = &doc.crossover {
            check_grid(&c.gammas, "crossover.gammas", &mut issues);
            if let Some([lo, hi]) = c.window {
                issues.check(lo > 0.0 && hi > lo, "crossover.window", "need 0 < start < end");
            }
        }

        let max_dim = doc.bath.as_ref().and_then(|b| b.max_dim).unwrap_or(DEFAULT_MAX_DIM);
        if let (Some(b), Some(ch)) = (&bath, &channels) {
            let free = ch.dephasing.iter().all(|g| *g == 0.0)
                && ch.hops.iter().all(|h| h.rate == 0.0)
                && ch.sink.is_none();
            issues.check(
                free,
                "bath",
                "an explicit bath evolves unitarily; dephasing, hops and sinks need a bath-free scenario",
            );
            if let Ok(basis) = ProductBasis::new(b.n_sites(), b.cutoffs()) {
                issues.check(
                    basis.total_dim() <= max_dim,
                    "bath",
                    format!("joint dimension {} exceeds the limit {max_dim}", basis.total_dim()),
                );
            }
        }

        issues.into_result()?;
        let output_dir = doc.output.as_ref().and_then(|o| o.directory.clone()).map(PathBuf::from);
        Ok(Self {
            network: network.expect("validated"),
            bath,
            max_dim,
            channels: channels.expect("validated"),
            initial: initial.expect("validated"),
            integrator: integrator.expect("validated"),
            origin_site: obs.origin_site,
            capture_threshold,
            output_dir,
            doc,
        })
    }

    pub fn name(&self) -> &str {
        &self.doc.name
    }

    /// Canonical text of the scenario as written.
    pub fn serialize(&self) -> String {
        serialize_doc(&self.doc)
    }

    pub fn sweep_gammas(&self) -> Result<Vec<f64>> {
        let s = self.doc.sweep.clone().unwrap_or_default();
        if let Some(g) = s.gammas {
            return Ok(g);
        }
        let j = self.network.max_coupling();
        let j = if j > 0.0 { j } else { 1.0 };
        let mut grid = log_grid(
            s.gamma_min.unwrap_or(DEFAULT_SWEEP_RANGE.0 * j),
            s.gamma_max.unwrap_or(DEFAULT_SWEEP_RANGE.1 * j),
            s.points.unwrap_or(DEFAULT_SWEEP_POINTS),
        )
        .map_err(|e| e.context("sweep"))?;
        if s.include_zero.unwrap_or(false) {
            grid.insert(0, 0.0);
        }
        Ok(grid)
    }

    pub fn crossover_window(&self) -> (f64, f64) {
        self.doc
            .crossover
            .as_ref()
            .and_then(|c| c.window)
            .map_or_else(|| default_fit_window(&self.network), |[a, b]| (a, b))
    }

    pub fn initial_site(&self) -> Option<usize> {
        match self.initial {
            InitialState::Site(s) => Some(s),
            InitialState::Amplitudes(_) => None,
        }
    }

    pub fn initial_density(&self) -> Result<DensityMatrix<f64>> {
        match &self.initial {
            InitialState::Site(s) => DensityMatrix::localized(self.network.n_sites(), *s),
            InitialState::Amplitudes(a) => Ok(DensityMatrix::from_pure(&PureState::on_sites(a.clone())?)),
        }
    }

    /// Site state times the bath vacuum on `basis`.
    pub fn initial_pure(&self, basis: &ProductBasis) -> Result<PureState<f64>> {
        let site_amps = match &self.initial {
            InitialState::Site(s) => {
                let mut v = DVector::zeros(self.network.n_sites());
                v[*s] = Complex::new(1.0, 0.0);
                v
            }
            InitialState::Amplitudes(a) => a.clone(),
        };
        let bd = basis.bath_dim();
        let mut full = DVector::zeros(basis.total_dim());
        for (i, z) in site_amps.iter().enumerate() {
            full[i * bd] = *z;
        }
        PureState::new(full, bd)
    }

    /// The document with every default written out, as recorded in run
    /// manifests. `with_sweep` also expands the dephasing grid.
    pub fn materialized(&self, with_sweep: bool) -> Result<ScenarioDoc> {
        let mut doc = self.doc.clone();
        let cfg = &self.integrator;
        doc.integrator = IntegratorDoc {
            method: Some(cfg.method.unwrap_or_else(|| Method::auto(self.propagated_dim())).as_str().to_owned()),
            dt: cfg.dt,
            t_final: Some(cfg.t_final),
            krylov_tol: Some(cfg.krylov.tol),
            krylov_max_dim: Some(cfg.krylov.max_dim),
            rk4_safety: Some(cfg.rk4_safety),
        };
        if let Some(b) = doc.bath.as_mut() {
            b.max_dim = Some(self.max_dim);
            if let Some(s) = b.spectral.as_mut() {
                s.family = Some(s.family_name());
            }
        }
        doc.channel = Some(ChannelDoc {
            dephasing: Some(RatesDoc::PerSite(self.channels.dephasing.clone())),
            hops: Some(
                self.channels
                    .hops
                    .iter()
                    .map(|h| HopDoc { from: h.from, to: h.to, rate: h.rate })
                    .collect(),
            ),
        });
        doc.initial = Some(match &self.initial {
            InitialState::Site(s) => InitialDoc { site: Some(*s), amplitudes: None },
            InitialState::Amplitudes(a) => InitialDoc {
                site: None,
                amplitudes: Some(a.iter().map(|z| [z.re, z.im]).collect()),
            },
        });
        doc.observables = Some(ObservablesDoc {
            origin_site: self.origin_site,
            capture_threshold: Some(self.capture_threshold),
        });
        let out = doc.output.get_or_insert_with(OutputDoc::default);
        out.stride = Some(cfg.stride);
        out.snapshots = Some(cfg.snapshots);
        if with_sweep || doc.sweep.is_some() {
            doc.sweep = Some(SweepDoc {
                gammas: Some(self.sweep_gammas()?),
                ..SweepDoc::default()
            });
        }
        if let Some(c) = doc.crossover.as_mut() {
            let (a, b) = self.crossover_window();
            c.window = Some([a, b]);
        }
        Ok(doc)
    }

    /// Dimension the integrator propagates: the joint space for bath runs,
    /// `N²` for the density matrix otherwise.
    pub fn propagated_dim(&self) -> usize {
        match &self.bath {
            Some(b) => b.cutoffs().iter().fold(self.network.n_sites(), |d, c| d.saturating_mul(c + 1)),
            None => self.network.n_sites().pow(2),
        }
    }

    /// Generator seeds used to build the network, if any.
    pub fn seeds(&self) -> Vec<u64> {
        self.doc.network.generator.iter().map(|g| g.seed).collect()
    }

    pub fn spectral_family(&self) -> Option<&'static str> {
        self.doc
            .bath
            .as_ref()
            .and_then(|b| b.spectral.as_ref())
            .map(|s| s.family_name().as_str())
    }
}

/// Validated sink reference for commands that need one.
pub fn require_sink(s: &Scenario) -> Result<Sink<f64>> {
    s.network
        .sink()
        .ok_or_else(|| Error::invalid("network.sink", "this command needs a sink"))
}
