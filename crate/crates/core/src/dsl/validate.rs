use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::config::{CircuitConfig, ElementDecl, PlateAmplitude, Side, SourceDecl, SweepVariable, System};
use crate::optics::wrap_phase;
use crate::quantum::UNITARY_TOL;

/// Tolerance on `p² + q² = 1` (and the product analogues) for values typed
/// into a circuit file. The engine renormalizes exactly.
pub const INPUT_NORM_TOL: f64 = 1e-6;

/// Tolerance on `t ∈ [0, 1]`, `|T| ≤ 1` and the angle ranges.
const RANGE_TOL: f64 = 1e-12;

pub const MIN_SWEEP_POINTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
}

/// The statement a finding refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Target {
    System,
    Source,
    Element(Side, usize),
    Sweep,
    Sampler,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub target: Target,
    pub severity: Severity,
    pub message: String,
}

impl Finding {
    fn error(target: Target, message: impl Into<String>) -> Self {
        Self {
            target,
            severity: Severity::Error,
            message: message.into(),
        }
    }
}

struct Checker {
    out: Vec<Finding>,
}

impl Checker {
    fn error(&mut self, target: Target, message: impl Into<String>) {
        self.out.push(Finding::error(target, message));
    }

    fn finite(&mut self, target: Target, values: &[f64]) -> bool {
        if values.iter().all(|v| v.is_finite()) {
            true
        } else {
            self.error(target, "non-finite value");
            false
        }
    }

    fn normalized(&mut self, target: Target, names: &str, a: f64, b: f64) {
        if a < 0.0 || b < 0.0 {
            self.error(target, format!("{names} must be nonnegative"));
        }
        let sum = a * a + b * b;
        if (sum - 1.0).abs() > INPUT_NORM_TOL {
            self.error(target, format!("source not normalized ({names}: sum of squares = {sum})"));
        }
    }

    fn plate(&mut self, target: Target, t1: &PlateAmplitude, t2: &PlateAmplitude) {
        if !self.finite(target, &[t1.magnitude, t1.phase, t2.magnitude, t2.phase]) {
            return;
        }
        for (name, t) in [("T1", t1), ("T2", t2)] {
            if t.magnitude < 0.0 {
                self.error(target, format!("{name} magnitude must be nonnegative"));
            } else if t.magnitude > 1.0 + RANGE_TOL {
                self.error(target, format!("unphysical gain: |{name}| = {} exceeds 1", t.magnitude));
            }
        }
    }
}

/// Checks every physical and structural constraint of a configuration.
/// Returns an empty list iff the configuration is valid.
pub fn validate(config: &CircuitConfig) -> Vec<Finding> {
    let mut c = Checker { out: Vec::new() };
    let fermion = config.system == System::Fermion;

    match config.source {
        SourceDecl::Entangled { p, q, alpha } => {
            if c.finite(Target::Source, &[p, q, alpha]) {
                c.normalized(Target::Source, "p^2 + q^2", p, q);
            }
        }
        SourceDecl::Product {
            mu,
            nu,
            mu_p,
            nu_p,
            phi_a,
            phi_b,
        } => {
            if fermion {
                c.error(Target::Source, "product sources are only defined for photon configs");
            }
            if c.finite(Target::Source, &[mu, nu, mu_p, nu_p, phi_a, phi_b]) {
                c.normalized(Target::Source, "mu^2 + nu^2", mu, nu);
                c.normalized(Target::Source, "mu_p^2 + nu_p^2", mu_p, nu_p);
            }
        }
        SourceDecl::Plates { t1, t2 } => c.plate(Target::Source, &t1, &t2),
    }

    let mut fermion_plates = usize::from(matches!(config.source, SourceDecl::Plates { .. }));
    for side in [Side::A, Side::B] {
        let mut basis_change: Option<&'static str> = None;
        for (i, el) in config.side(side).iter().enumerate() {
            let target = Target::Element(side, i);
            if let Some(what) = basis_change {
                c.error(target, format!("element after {what}"));
            }
            match *el {
                ElementDecl::Plate { t1, t2 } => {
                    c.plate(target, &t1, &t2);
                    if fermion {
                        if side == Side::B {
                            c.error(target, "fermion configs allow a plate on side A only");
                        } else {
                            fermion_plates += 1;
                            if fermion_plates > 1 {
                                c.error(target, "fermion configs allow at most one plate");
                            }
                        }
                    }
                }
                ElementDecl::Phase { path, phi } => {
                    if fermion {
                        c.error(target, "phase shifters are not part of fermion configs");
                    }
                    if !(path == 1 || path == 2) {
                        c.error(target, format!("phase shifter path must be 1 or 2, got {path}"));
                    }
                    c.finite(target, &[phi]);
                }
                ElementDecl::BeamSplitter {
                    t,
                    tau,
                    rho,
                    tau_p,
                    rho_p,
                } => {
                    basis_change = Some("beam splitter");
                    if fermion {
                        c.error(target, "fermion configs use `bloch` in place of `bs`");
                    }
                    if c.finite(target, &[t, tau, rho, tau_p, rho_p]) {
                        if !(-RANGE_TOL..=1.0 + RANGE_TOL).contains(&t) {
                            c.error(target, format!("beam splitter t = {t} outside [0, 1]"));
                        }
                        let residual = wrap_phase(tau + tau_p - rho - rho_p - PI);
                        if residual.abs() > UNITARY_TOL {
                            c.error(
                                target,
                                format!(
                                    "beam splitter phases violate tau + tau_p - rho - rho_p = pi (mod 2pi), off by {residual}"
                                ),
                            );
                        }
                    }
                }
                ElementDecl::Bloch { chi, delta } => {
                    basis_change = Some("Bloch basis");
                    if !fermion {
                        c.error(target, "`bloch` is only valid in fermion configs");
                    }
                    if c.finite(target, &[chi, delta]) {
                        if !(0.0..=PI).contains(&chi) {
                            c.error(target, format!("chi = {chi} outside [0, pi]"));
                        }
                        if !(0.0..TAU).contains(&delta) {
                            c.error(target, format!("delta = {delta} outside [0, 2pi)"));
                        }
                    }
                }
            }
        }
    }

    if let Some(sweep) = config.sweep {
        if sweep.points < MIN_SWEEP_POINTS {
            c.error(
                Target::Sweep,
                format!("sweep needs at least {MIN_SWEEP_POINTS} points, got {}", sweep.points),
            );
        }
        let product = matches!(config.source, SourceDecl::Product { .. });
        match sweep.variable {
            SweepVariable::W | SweepVariable::Alpha if product => c.error(
                Target::Sweep,
                format!("cannot sweep `{}` for a product source", sweep.variable.keyword()),
            ),
            SweepVariable::Phi if fermion => c.error(Target::Sweep, "fermion configs sweep `alpha` or `w`"),
            _ => {}
        }
    }

    if let Some(sampler) = config.sampler {
        if sampler.n == 0 {
            c.error(Target::Sampler, "sample n must be at least 1");
        }
    }

    c.out
}
