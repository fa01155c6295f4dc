//! Discretization of a continuous bath spectral density into a finite set of
//! modes.
//!
//! The band `[ω_lo, ω_hi]` is split into `K` equal subintervals of width
//! `Δω`; mode `k` sits at the midpoint `ω_k` and couples to site `i` with
//! `g_{i,k} = s_i · sqrt(J(ω_k) Δω)`, so that each mode carries the spectral
//! weight of its subinterval.

use holstein_core::error::{Error, Issues, Result};
use holstein_core::model::{BathSpec, Mode};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Resolved spectral density.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectralFamily {
    /// `J(ω) = η ω e^{−ω/ω_c}`.
    OhmicExponentialCutoff { eta: f64, cutoff: f64 },
    /// `J(ω) = η`.
    Flat { eta: f64 },
    /// Piecewise-linear through `(ω, J)` points, zero outside them.
    ExplicitTable { points: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyName {
    #[default]
    OhmicExponentialCutoff,
    Flat,
    ExplicitTable,
}

impl FamilyName {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::OhmicExponentialCutoff => "ohmic-exponential-cutoff",
            Self::Flat => "flat",
            Self::ExplicitTable => "explicit-table",
        }
    }
}

impl SpectralFamily {
    pub fn name(&self) -> &'static str {
        match self {
            Self::OhmicExponentialCutoff { .. } => FamilyName::OhmicExponentialCutoff,
            Self::Flat { .. } => FamilyName::Flat,
            Self::ExplicitTable { .. } => FamilyName::ExplicitTable,
        }
        .as_str()
    }

    pub fn density(&self, w: f64) -> f64 {
        match self {
            Self::OhmicExponentialCutoff { eta, cutoff } => eta * w * (-w / cutoff).exp(),
            Self::Flat { eta } => *eta,
            Self::ExplicitTable { points } => {
                let k = points.partition_point(|p| p[0] <= w);
                if k == 0 || k == points.len() {
                    return if k > 0 && points[k - 1][0] == w { points[k - 1][1] } else { 0.0 };
                }
                let ([w0, j0], [w1, j1]) = (points[k - 1], points[k]);
                j0 + (j1 - j0) * (w - w0) / (w1 - w0)
            }
        }
    }
}

/// Scenario block describing a bath by its spectral density. `family`
/// defaults to ohmic with exponential cutoff; `eta` and `cutoff` feed the
/// analytic families, `points` the tabulated one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralDensitySpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<[f64; 2]>>,
    pub band: [f64; 2],
    pub modes: usize,
    pub fock_cutoff: usize,
    /// Per-site coupling scale `s_i`; absent means 1 on every site.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub site_scale: Option<Vec<f64>>,
}

impl SpectralDensitySpec {
    pub fn from_family(family: SpectralFamily, band: [f64; 2], modes: usize, fock_cutoff: usize) -> Self {
        let mut spec = Self {
            family: None,
            eta: None,
            cutoff: None,
            points: None,
            band,
            modes,
            fock_cutoff,
            site_scale: None,
        };
        match family {
            SpectralFamily::OhmicExponentialCutoff { eta, cutoff } => {
                spec.family = Some(FamilyName::OhmicExponentialCutoff);
                spec.eta = Some(eta);
                spec.cutoff = Some(cutoff);
            }
            SpectralFamily::Flat { eta } => {
                spec.family = Some(FamilyName::Flat);
                spec.eta = Some(eta);
            }
            SpectralFamily::ExplicitTable { points } => {
                spec.family = Some(FamilyName::ExplicitTable);
                spec.points = Some(points);
            }
        }
        spec
    }

    pub fn family_name(&self) -> FamilyName {
        self.family.unwrap_or_default()
    }

    fn resolve(&self, field: &str, issues: &mut Issues) -> Option<SpectralFamily> {
        let positive = |x: Option<f64>| x.is_some_and(|x| x > 0.0 && x.is_finite());
        let name = self.family_name();
        let wants = |key: &str| match name {
            FamilyName::OhmicExponentialCutoff => key == "eta" || key == "cutoff",
            FamilyName::Flat => key == "eta",
            FamilyName::ExplicitTable => key == "points",
        };
        let given = [
            ("eta", self.eta.is_some()),
            ("cutoff", self.cutoff.is_some()),
            ("points", self.points.is_some()),
        ];
        let mut ok = true;
        for (key, present) in given {
            if present != wants(key) {
                let what = if present { "does not take" } else { "needs" };
                issues.push(format!("{field}.{key}"), format!("family {} {what} `{key}`", name.as_str()));
                ok = false;
            }
        }
        if !ok {
            return None;
        }
        match name {
            FamilyName::OhmicExponentialCutoff | FamilyName::Flat => {
                issues.check(positive(self.eta), format!("{field}.eta"), "must be positive");
                if name == FamilyName::Flat {
                    return Some(SpectralFamily::Flat { eta: self.eta? });
                }
                issues.check(positive(self.cutoff), format!("{field}.cutoff"), "must be positive");
                Some(SpectralFamily::OhmicExponentialCutoff {
                    eta: self.eta?,
                    cutoff: self.cutoff?,
                })
            }
            FamilyName::ExplicitTable => {
                let points = self.points.clone()?;
                issues.check(points.len() >= 2, format!("{field}.points"), "need at least two points");
                issues.check(
                    points.windows(2).all(|w| w[1][0] > w[0][0]),
                    format!("{field}.points"),
                    "frequencies must be strictly increasing",
                );
                issues.check(
                    points.iter().all(|p| p[1] >= 0.0 && p[1].is_finite() && p[0].is_finite()),
                    format!("{field}.points"),
                    "densities must be nonnegative and finite",
                );
                Some(SpectralFamily::ExplicitTable { points })
            }
        }
    }

    /// The density this block describes, after checking every parameter.
    pub fn validate(&self, n_sites: usize, field: &str) -> Result<SpectralFamily> {
        let mut issues = Issues::new();
        let family = self.resolve(field, &mut issues);
        let [lo, hi] = self.band;
        issues.check(
            lo > 0.0 && hi.is_finite() && hi > lo,
            format!("{field}.band"),
            format!("band [{lo}, {hi}] must satisfy 0 < lo < hi < ∞"),
        );
        issues.check(self.modes >= 1, format!("{field}.modes"), "need at least one mode");
        issues.check(self.fock_cutoff >= 1, format!("{field}.fock_cutoff"), "must be at least 1");
        if let Some(s) = &self.site_scale {
            issues.check(
                s.len() == n_sites,
                format!("{field}.site_scale"),
                format!("{} entries for {n_sites} sites", s.len()),
            );
            issues.check(
                s.iter().all(|x| x.is_finite()),
                format!("{field}.site_scale"),
                "scales must be finite",
            );
        }
        issues.into_result()?;
        Ok(family.expect("validated"))
    }

    /// Mode frequencies and the unscaled coupling `sqrt(J(ω_k) Δω)` of each.
    pub fn mode_table(&self, family: &SpectralFamily) -> Vec<(f64, f64)> {
        let [lo, hi] = self.band;
        let dw = (hi - lo) / self.modes as f64;
        (0..self.modes)
            .map(|k| {
                let w = lo + (k as f64 + 0.5) * dw;
                (w, (family.density(w) * dw).sqrt())
            })
            .collect()
    }
}

pub fn discretize_spectral_density(spec: &SpectralDensitySpec, n_sites: usize) -> Result<BathSpec<f64>> {
    let family = spec.validate(n_sites, "bath.spectral")?;
    let table = spec.mode_table(&family);
    let modes = table.iter().map(|&(w, _)| Mode::new(w, spec.fock_cutoff)).collect();
    let g = DMatrix::from_fn(n_sites, table.len(), |i, k| {
        spec.site_scale.as_ref().map_or(1.0, |s| s[i]) * table[k].1
    });
    BathSpec::new(modes, g).map_err(|e: Error| e.context("bath.spectral"))
}
