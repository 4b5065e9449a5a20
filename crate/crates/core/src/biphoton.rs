//! Bi-photon source construction, evolution through both arms and
//! extraction of the detection distribution by direct state-vector
//! arithmetic. This is the reference every closed form is checked against.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::optics::{AbsorptivePlateParams, Element, Ratio};
use crate::quantum::{tensor, BipartiteState, LocalOperator, SingleParticleState, NORM_TOL};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceSpec {
    /// `p|1,1⟩ + q e^{iα}|2,2⟩`; the relative phase `φ` comes from shifters.
    Entangled { p: f64, q: f64, alpha: f64 },
    /// `(μ|1⟩ + ν e^{iφ_A}|2⟩)_A ⊗ (μ′ e^{iφ_B}|1⟩ + ν′|2⟩)_B`
    Product {
        mu: f64,
        nu: f64,
        mu_p: f64,
        nu_p: f64,
        phi_a: f64,
        phi_b: f64,
    },
}

fn check_pair(what: &str, a: f64, b: f64) -> Result<()> {
    if a < 0.0 || b < 0.0 {
        return Err(Error::InvalidInput(format!("{what} amplitudes must be nonnegative")));
    }
    let sum = a * a + b * b;
    if (sum - 1.0).abs() > NORM_TOL {
        return Err(Error::SourceNotNormalized {
            detail: format!("{what}: squared amplitudes sum to {sum}"),
        });
    }
    Ok(())
}

impl SourceSpec {
    pub fn entangled(p: f64, q: f64, alpha: f64) -> Result<Self> {
        ensure_finite("source parameter", [p, q, alpha])?;
        check_pair("p, q", p, q)?;
        Ok(SourceSpec::Entangled { p, q, alpha })
    }

    /// Entangled source with weight ratio `ε = p²/q²`.
    pub fn from_epsilon(eps: f64, alpha: f64) -> Result<Self> {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::InvalidInput(format!("epsilon must be positive, got {eps}")));
        }
        Self::entangled((eps / (1.0 + eps)).sqrt(), (1.0 + eps).recip().sqrt(), alpha)
    }

    pub fn product(mu: f64, nu: f64, mu_p: f64, nu_p: f64, phi_a: f64, phi_b: f64) -> Result<Self> {
        ensure_finite("source parameter", [mu, nu, mu_p, nu_p, phi_a, phi_b])?;
        check_pair("mu, nu", mu, nu)?;
        check_pair("mu_p, nu_p", mu_p, nu_p)?;
        Ok(SourceSpec::Product {
            mu,
            nu,
            mu_p,
            nu_p,
            phi_a,
            phi_b,
        })
    }

    pub fn epsilon(&self) -> Option<Ratio> {
        match *self {
            SourceSpec::Entangled { p, q, .. } => Some(Ratio::of(p * p, q * q)),
            SourceSpec::Product { .. } => None,
        }
    }
}

pub fn build_source(spec: &SourceSpec) -> BipartiteState {
    match *spec {
        SourceSpec::Entangled { p, q, alpha } => BipartiteState::from_array([
            C64::new(p, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::from_polar(q, alpha),
        ]),
        SourceSpec::Product {
            mu,
            nu,
            mu_p,
            nu_p,
            phi_a,
            phi_b,
        } => {
            let a = SingleParticleState::new(C64::new(mu, 0.0), C64::from_polar(nu, phi_a));
            let b = SingleParticleState::new(C64::from_polar(mu_p, phi_b), C64::new(nu_p, 0.0));
            a.and_then(|a| b.map(|b| tensor(&a, &b)))
        }
    }
    .expect("validated source parameters are finite")
}

/// The equally weighted `(|1,1⟩ + |2,2⟩)/√2` source.
pub fn equal_weight_source() -> SourceSpec {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    SourceSpec::Entangled { p: h, q: h, alpha: 0.0 }
}

/// Passes the equally weighted source through the plate pair on side A and
/// post-selects on survival. Returns the resulting source and the surviving
/// fraction `(|T̃₁|² + |T̃₂|²)/2`.
pub fn build_source_from_plates(plates: &AbsorptivePlateParams) -> Result<(SourceSpec, f64)> {
    let w1 = plates.t1().norm_sqr();
    let w2 = plates.t2().norm_sqr();
    let total = w1 + w2;
    if total == 0.0 {
        return Err(Error::TotalAbsorption);
    }
    let spec = SourceSpec::Entangled {
        p: (w1 / total).sqrt(),
        q: (w2 / total).sqrt(),
        alpha: plates.relative_phase(),
    };
    Ok((spec, total / 2.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasurementBasis {
    /// No basis change on this side: detectors sit on the paths.
    Path,
    /// Beam splitter (or Bloch rotation) in place.
    Detector,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evolved {
    /// Post-selected, normalized state.
    pub state: BipartiteState,
    pub survival: f64,
    pub basis_a: MeasurementBasis,
    pub basis_b: MeasurementBasis,
}

fn check_arm(arm: &[Element], allow: impl Fn(&Element) -> bool) -> Result<MeasurementBasis> {
    if let Some(bad) = arm.iter().find(|e| !allow(e)) {
        return Err(Error::InvalidInput(format!("element {bad:?} not allowed in this arm")));
    }
    match arm.iter().position(Element::is_basis_change) {
        None => Ok(MeasurementBasis::Path),
        Some(i) if i + 1 == arm.len() => Ok(MeasurementBasis::Detector),
        Some(_) => Err(Error::InvalidInput("element after beam splitter".into())),
    }
}

pub(crate) fn arm_operator(arm: &[Element]) -> LocalOperator {
    arm.iter()
        .fold(LocalOperator::identity(), |acc, e| acc.then(&e.operator()))
}

/// Applies both arms to an arbitrary initial state and post-selects.
pub(crate) fn evolve_state(
    initial: &BipartiteState,
    arm_a: &[Element],
    arm_b: &[Element],
    allow: impl Fn(&Element) -> bool + Copy,
) -> Result<Evolved> {
    let basis_a = check_arm(arm_a, allow)?;
    let basis_b = check_arm(arm_b, allow)?;
    let out = initial
        .apply_local(&arm_operator(arm_a), &arm_operator(arm_b))
        .normalize()?;
    Ok(Evolved {
        state: out.state,
        survival: out.survival,
        basis_a,
        basis_b,
    })
}

/// Source → arms → post-selection. Each arm may hold plates and shifters in
/// any order, and at most one beam splitter, which must come last.
pub fn evolve(spec: &SourceSpec, arm_a: &[Element], arm_b: &[Element]) -> Result<Evolved> {
    evolve_state(&build_source(spec), arm_a, arm_b, |e| {
        !matches!(e, Element::Bloch(_))
    })
}

/// Joint and local detection probabilities. For the spin system the labels
/// map as `e ↔ M`, `ē ↔ N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionDistribution {
    pub p_mm: f64,
    pub p_nn: f64,
    pub p_mn: f64,
    pub p_nm: f64,
    pub p_plus: f64,
    pub p_minus: f64,
    /// `P(M,M) − P(N,N)`
    pub delta_p_plus: f64,
    /// `P⁺ − P⁻`
    pub delta_p_pm: f64,
    pub local_a_m: f64,
    pub local_a_n: f64,
    pub local_b_m: f64,
    pub local_b_n: f64,
    pub survival: f64,
}

impl DetectionDistribution {
    pub fn from_joint(p_mm: f64, p_nn: f64, p_mn: f64, p_nm: f64) -> Self {
        let p_plus = p_mm + p_nn;
        let p_minus = p_mn + p_nm;
        Self {
            p_mm,
            p_nn,
            p_mn,
            p_nm,
            p_plus,
            p_minus,
            delta_p_plus: p_mm - p_nn,
            delta_p_pm: p_plus - p_minus,
            local_a_m: p_mm + p_mn,
            local_a_n: p_nn + p_nm,
            local_b_m: p_mm + p_nm,
            local_b_n: p_nn + p_mn,
            survival: 1.0,
        }
    }

    pub fn with_survival(mut self, survival: f64) -> Self {
        self.survival = survival;
        self
    }

    /// `[P(M,M), P(M,N), P(N,M), P(N,N)]`, the storage order of a pair state.
    pub fn joint(&self) -> [f64; 4] {
        [self.p_mm, self.p_mn, self.p_nm, self.p_nn]
    }

    pub fn local_marginals(&self) -> LocalMarginals {
        local_marginals(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalMarginals {
    pub a_m: f64,
    pub a_n: f64,
    pub b_m: f64,
    pub b_n: f64,
}

pub fn detection_distribution(state: &BipartiteState) -> Result<DetectionDistribution> {
    if !state.is_normalized() {
        return Err(Error::NotNormalized {
            norm_squared: state.norm_squared(),
        });
    }
    let [mm, mn, nm, nn] = state.probabilities();
    Ok(DetectionDistribution::from_joint(mm, nn, mn, nm))
}

pub fn local_marginals(dist: &DetectionDistribution) -> LocalMarginals {
    LocalMarginals {
        a_m: dist.p_mm + dist.p_mn,
        a_n: dist.p_nn + dist.p_nm,
        b_m: dist.p_mm + dist.p_nm,
        b_n: dist.p_nn + dist.p_mn,
    }
}

/// Convenience: entangled source plus identical splitters on both sides,
/// with `φ_A` on A path 2 and `φ_B` on B path 1.
pub fn symmetric_setup(
    spec: &SourceSpec,
    bs: &crate::optics::BeamSplitterParams,
    phi_a: f64,
    phi_b: f64,
) -> Result<DetectionDistribution> {
    use crate::optics::{Path, PhaseShifterParams};
    let arm_a = [
        Element::Phase(PhaseShifterParams { path: Path::Two, phi: phi_a }),
        Element::BeamSplitter(*bs),
    ];
    let arm_b = [
        Element::Phase(PhaseShifterParams { path: Path::One, phi: phi_b }),
        Element::BeamSplitter(*bs),
    ];
    let ev = evolve(spec, &arm_a, &arm_b)?;
    Ok(detection_distribution(&ev.state)?.with_survival(ev.survival))
}
