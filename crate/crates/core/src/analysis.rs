//! Phase sweeps, fringe visibility, visibility surfaces and the
//! local-coherence probe.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bifermion::spin_visibilities;
use crate::biphoton::DetectionDistribution;
use crate::circuit::Experiment;
use crate::closed_form::visibilities;
use crate::dsl::{CircuitConfig, ElementDecl, SourceDecl, SweepVariable, System, MIN_SWEEP_POINTS};
use crate::error::{Error, Result};

/// A probability that can be tracked along a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    PMm,
    PNn,
    PMn,
    PNm,
    PPlus,
    PMinus,
    LocalAM,
    LocalAN,
    LocalBM,
    LocalBN,
}

impl Quantity {
    pub const ALL: [Quantity; 10] = [
        Quantity::PMm,
        Quantity::PNn,
        Quantity::PMn,
        Quantity::PNm,
        Quantity::PPlus,
        Quantity::PMinus,
        Quantity::LocalAM,
        Quantity::LocalAN,
        Quantity::LocalBM,
        Quantity::LocalBN,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::PMm => "p_mm",
            Quantity::PNn => "p_nn",
            Quantity::PMn => "p_mn",
            Quantity::PNm => "p_nm",
            Quantity::PPlus => "p_plus",
            Quantity::PMinus => "p_minus",
            Quantity::LocalAM => "local_a_m",
            Quantity::LocalAN => "local_a_n",
            Quantity::LocalBM => "local_b_m",
            Quantity::LocalBN => "local_b_n",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|q| q.name() == name)
            .ok_or_else(|| Error::UnknownQuantity(name.to_string()))
    }

    pub fn of(self, d: &DetectionDistribution) -> f64 {
        match self {
            Quantity::PMm => d.p_mm,
            Quantity::PNn => d.p_nn,
            Quantity::PMn => d.p_mn,
            Quantity::PNm => d.p_nm,
            Quantity::PPlus => d.p_plus,
            Quantity::PMinus => d.p_minus,
            Quantity::LocalAM => d.local_a_m,
            Quantity::LocalAN => d.local_a_n,
            Quantity::LocalBM => d.local_b_m,
            Quantity::LocalBN => d.local_b_n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePattern {
    pub variable: SweepVariable,
    pub grid: Vec<f64>,
    pub series: Vec<Series>,
}

impl PhasePattern {
    pub fn series(&self, name: &str) -> Result<&[f64]> {
        self.series
            .iter()
            .find(|s| s.name == name)
            .map(|s| s.values.as_slice())
            .ok_or_else(|| Error::UnknownQuantity(name.to_string()))
    }

    /// Header `variable,series…`, one row per grid point, 17 significant
    /// digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(self.variable.keyword());
        for s in &self.series {
            out.push(',');
            out.push_str(&s.name);
        }
        out.push('\n');
        for (i, x) in self.grid.iter().enumerate() {
            out.push_str(&fmt_num(*x));
            for s in &self.series {
                out.push(',');
                out.push_str(&fmt_num(s.values[i]));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("pattern serializes")
    }
}

pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

/// `n` uniformly spaced points over `[−π, π]`, both ends included.
pub fn phase_grid(n: usize) -> Vec<f64> {
    let step = 2.0 * PI / (n - 1) as f64;
    (0..n)
        .map(|i| if i + 1 == n { PI } else { -PI + i as f64 * step })
        .collect()
}

/// Sweep variable named in the config, or the natural default: `w` for
/// entangled sources, `phi` for product sources.
pub fn default_variable(config: &CircuitConfig) -> SweepVariable {
    match (config.sweep, config.source) {
        (Some(s), _) => s.variable,
        (None, SourceDecl::Product { .. }) => SweepVariable::Phi,
        (None, _) => SweepVariable::W,
    }
}

/// Evaluates the engine at `n_points` phases over `[−π, π]` of the config's
/// sweep variable and records each requested quantity.
pub fn sweep_phase(config: &CircuitConfig, quantities: &[Quantity], n_points: usize) -> Result<PhasePattern> {
    sweep_variable(config, default_variable(config), quantities, n_points)
}

pub fn sweep_variable(
    config: &CircuitConfig,
    variable: SweepVariable,
    quantities: &[Quantity],
    n_points: usize,
) -> Result<PhasePattern> {
    if n_points < MIN_SWEEP_POINTS {
        return Err(Error::InvalidInput(format!(
            "sweep needs at least {MIN_SWEEP_POINTS} points, got {n_points}"
        )));
    }
    if quantities.is_empty() {
        return Err(Error::InvalidInput("no quantities requested".into()));
    }
    let base = Experiment::from_config(config)?;
    let grid = phase_grid(n_points);
    let dists = grid
        .par_iter()
        .map(|&x| base.with_sweep(variable, x)?.distribution())
        .collect::<Result<Vec<_>>>()?;
    let series = quantities
        .iter()
        .map(|q| Series {
            name: q.name().to_string(),
            values: dists.iter().map(|d| q.of(d)).collect(),
        })
        .collect();
    Ok(PhasePattern { variable, grid, series })
}

/// `(max − min)/(max + min)` of a sampled pattern.
pub fn visibility_from_pattern(pattern: &PhasePattern, series: &str) -> Result<f64> {
    visibility_of(pattern.series(series)?)
}

pub fn visibility_of(values: &[f64]) -> Result<f64> {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if values.is_empty() || max + min <= 0.0 {
        return Err(Error::UndefinedVisibility("series is empty or identically zero".into()));
    }
    Ok((max - min) / (max + min))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceKind {
    PhotonPlus,
    PhotonMinus,
    FermionPlus,
    FermionMinus,
}

impl SurfaceKind {
    pub const ALL: [SurfaceKind; 4] = [
        SurfaceKind::PhotonPlus,
        SurfaceKind::PhotonMinus,
        SurfaceKind::FermionPlus,
        SurfaceKind::FermionMinus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SurfaceKind::PhotonPlus => "photon_plus",
            SurfaceKind::PhotonMinus => "photon_minus",
            SurfaceKind::FermionPlus => "fermion_plus",
            SurfaceKind::FermionMinus => "fermion_minus",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn visibility(self, eps: f64, eta: f64) -> Result<f64> {
        Ok(match self {
            SurfaceKind::PhotonPlus => visibilities(eps, eta)?.0,
            SurfaceKind::PhotonMinus => visibilities(eps, eta)?.1,
            SurfaceKind::FermionPlus => spin_visibilities(eps, eta)?.0,
            SurfaceKind::FermionMinus => spin_visibilities(eps, eta)?.1,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisibilitySurface {
    pub kind: SurfaceKind,
    pub eps_grid: Vec<f64>,
    pub eta_grid: Vec<f64>,
    /// `values[i][j]` at `(eps_grid[i], eta_grid[j])`.
    pub values: Vec<Vec<f64>>,
}

impl VisibilitySurface {
    /// Long format: `eps,eta,<kind>`, eps-major.
    pub fn to_csv(&self) -> String {
        surfaces_to_csv(std::slice::from_ref(self)).expect("a single surface is consistent")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("surface serializes")
    }

    /// Largest value and its `(ε, η)`.
    pub fn argmax(&self) -> (f64, f64, f64) {
        let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
        for (i, row) in self.values.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v > best.0 {
                    best = (v, self.eps_grid[i], self.eta_grid[j]);
                }
            }
        }
        best
    }
}

/// Several surfaces on the same grid as one long-format CSV.
pub fn surfaces_to_csv(surfaces: &[VisibilitySurface]) -> Result<String> {
    let first = surfaces
        .first()
        .ok_or_else(|| Error::InvalidInput("no surfaces".into()))?;
    if surfaces
        .iter()
        .any(|s| s.eps_grid != first.eps_grid || s.eta_grid != first.eta_grid)
    {
        return Err(Error::InvalidInput("surfaces use different grids".into()));
    }
    let mut out = String::from("eps,eta");
    for s in surfaces {
        out.push(',');
        out.push_str(s.kind.name());
    }
    out.push('\n');
    for (i, eps) in first.eps_grid.iter().enumerate() {
        for (j, eta) in first.eta_grid.iter().enumerate() {
            let _ = write!(out, "{},{}", fmt_num(*eps), fmt_num(*eta));
            for s in surfaces {
                let _ = write!(out, ",{}", fmt_num(s.values[i][j]));
            }
            out.push('\n');
        }
    }
    Ok(out)
}

pub fn visibility_surface(kind: SurfaceKind, eps_grid: &[f64], eta_grid: &[f64]) -> Result<VisibilitySurface> {
    if eps_grid.is_empty() || eta_grid.is_empty() {
        return Err(Error::InvalidInput("surface grids must be nonempty".into()));
    }
    if let Some(bad) = eps_grid.iter().chain(eta_grid).find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::InvalidInput(format!("surface grid values must be positive, got {bad}")));
    }
    let values = eps_grid
        .par_iter()
        .map(|&eps| eta_grid.iter().map(|&eta| kind.visibility(eps, eta)).collect())
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(VisibilitySurface {
        kind,
        eps_grid: eps_grid.to_vec(),
        eta_grid: eta_grid.to_vec(),
        values,
    })
}

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && lo.is_finite() && hi.is_finite()) || n == 0 {
        return Err(Error::InvalidInput(format!("bad log grid {lo}:{hi}:{n}")));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.log10(), hi.log10());
    Ok((0..n)
        .map(|i| match i {
            0 => lo,
            _ if i + 1 == n => hi,
            _ => 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64),
        })
        .map(|v| if (v - 1.0).abs() < 1e-12 { 1.0 } else { v })
        .collect())
}

/// Which end of the probe family a member belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "branch", rename_all = "snake_case")]
pub enum ProbeMember {
    Product { mu: f64, nu: f64 },
    Entangled { epsilon: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeFamily {
    pub members: Vec<ProbeMember>,
    /// Splitter transmission used on both sides.
    pub t: f64,
    pub points: usize,
}

impl Default for ProbeFamily {
    fn default() -> Self {
        let h = FRAC_1_SQRT_2;
        Self {
            members: vec![
                ProbeMember::Product { mu: h, nu: h },
                ProbeMember::Entangled { epsilon: 1.0 },
                ProbeMember::Entangled { epsilon: 1.0 + 1e-6 },
                ProbeMember::Entangled { epsilon: 1.0 - 1e-6 },
                ProbeMember::Entangled { epsilon: 1e-6 },
                ProbeMember::Entangled { epsilon: 1e6 },
            ],
            t: h,
            points: 361,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub member: ProbeMember,
    pub visibility_a: f64,
    pub visibility_b: f64,
}

impl ProbeResult {
    pub fn local_visibility(&self) -> f64 {
        self.visibility_a.max(self.visibility_b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub results: Vec<ProbeResult>,
    /// Largest local visibility over entangled members.
    pub max_entangled_visibility: f64,
    /// Smallest local visibility over product members.
    pub min_product_visibility: f64,
}

impl ProbeReport {
    /// Local fringes survive at the product member and vanish (below `tol`)
    /// for every entangled member.
    pub fn shows_discontinuity(&self, threshold: f64, tol: f64) -> bool {
        self.min_product_visibility > threshold && self.max_entangled_visibility < tol
    }
}

fn probe_config(member: ProbeMember, t: f64) -> CircuitConfig {
    let source = match member {
        ProbeMember::Product { mu, nu } => SourceDecl::Product {
            mu,
            nu,
            mu_p: mu,
            nu_p: nu,
            phi_a: 0.0,
            phi_b: 0.0,
        },
        ProbeMember::Entangled { epsilon } => SourceDecl::Entangled {
            p: (epsilon / (1.0 + epsilon)).sqrt(),
            q: (1.0 + epsilon).recip().sqrt(),
            alpha: 0.0,
        },
    };
    CircuitConfig {
        system: System::Photon,
        source,
        side_a: vec![ElementDecl::splitter(t)],
        side_b: vec![ElementDecl::splitter(t)],
        sweep: None,
        sampler: None,
    }
}

/// Local-marginal fringe visibility over a `φ` sweep for each member.
pub fn local_coherence_probe(family: &ProbeFamily) -> Result<ProbeReport> {
    let results = family
        .members
        .iter()
        .map(|&member| {
            let pattern = sweep_variable(
                &probe_config(member, family.t),
                SweepVariable::Phi,
                &[Quantity::LocalAM, Quantity::LocalBM],
                family.points,
            )?;
            Ok(ProbeResult {
                member,
                visibility_a: visibility_from_pattern(&pattern, Quantity::LocalAM.name())?,
                visibility_b: visibility_from_pattern(&pattern, Quantity::LocalBM.name())?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let over = |product: bool, init: f64, pick: fn(f64, f64) -> f64| {
        results
            .iter()
            .filter(|r| matches!(r.member, ProbeMember::Product { .. }) == product)
            .map(ProbeResult::local_visibility)
            .fold(init, pick)
    };
    Ok(ProbeReport {
        max_entangled_visibility: over(false, 0.0, f64::max),
        min_product_visibility: over(true, f64::INFINITY, f64::min),
        results,
    })
}

/// The three parameter sets of the interference-pattern figure.
pub const FIG4_SETS: [(f64, f64); 3] = [(1.0, 1.0), (4.0, 5.0), (9.0, 0.5)];

/// Entangled photon config with weight ratio `eps` and splitter ratio `eta`.
pub fn photon_config(eps: f64, eta: f64, alpha: f64) -> CircuitConfig {
    let p = (eps / (1.0 + eps)).sqrt();
    let q = (1.0 + eps).recip().sqrt();
    CircuitConfig::photon_entangled(p, q, alpha, (eta / (1.0 + eta)).sqrt())
}

/// `P(M,M)`, `P(N,N)` and `P⁺` against `w` for each figure parameter set,
/// merged into one pattern with series suffixed `_eps<ε>_eta<η>`.
pub fn fig4_data(points: usize) -> Result<PhasePattern> {
    let mut merged: Option<PhasePattern> = None;
    for (eps, eta) in FIG4_SETS {
        let p = sweep_variable(
            &photon_config(eps, eta, 0.0),
            SweepVariable::W,
            &[Quantity::PMm, Quantity::PNn, Quantity::PPlus],
            points,
        )?;
        let suffixed = p.series.into_iter().map(|s| Series {
            name: format!("{}_eps{eps}_eta{eta}", s.name),
            values: s.values,
        });
        match &mut merged {
            None => {
                merged = Some(PhasePattern {
                    variable: p.variable,
                    grid: p.grid,
                    series: suffixed.collect(),
                })
            }
            Some(m) => m.series.extend(suffixed),
        }
    }
    Ok(merged.expect("three parameter sets"))
}

/// `V⁺` and `V⁻` photon surfaces on a 41-point log grid over `[1e-2, 1e2]`.
pub fn fig5_data() -> Result<Vec<VisibilitySurface>> {
    let grid = log_grid(1e-2, 1e2, 41)?;
    [SurfaceKind::PhotonPlus, SurfaceKind::PhotonMinus]
        .into_iter()
        .map(|k| visibility_surface(k, &grid, &grid))
        .collect()
}
