//! Per-arm optical elements and the reduced parameters `(ε, η, w)`.
//!
//! A beam splitter is described by the ket transform
//!
//! ```text
//! |M⟩ = t̃ |1⟩ + r̃′|2⟩        t̃ = t e^{iτ},  r̃ = r e^{iρ}
//! |N⟩ = r̃ |1⟩ + t̃′|2⟩        t̃′ = t e^{iτ′}, r̃′ = r e^{iρ′}
//! ```
//!
//! with `t² + r² = 1` and `τ + τ′ − ρ − ρ′ ≡ π (mod 2π)`. Inverting it with
//! the determinant dropped gives `|1⟩ = t̃′|M⟩ − r̃′|N⟩`, `|2⟩ = −r̃|M⟩ + t̃|N⟩`,
//! so a path-basis amplitude pair `(a1, a2)` becomes the detector-basis pair
//! `(t̃′a1 − r̃a2, −r̃′a1 + t̃a2)`. That map, [`BeamSplitterParams::detector_map`],
//! is what an arm applies.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::bifermion::BlochBasis;
use crate::biphoton::SourceSpec;
use crate::error::{ensure_finite, Error, Result};
use crate::quantum::{LocalOperator, NORM_TOL, UNITARY_TOL};
use crate::C64;

/// Reduces a phase to `(−π, π]`.
pub fn wrap_phase(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y > PI {
        y - TAU
    } else {
        y
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamSplitterParams {
    t: f64,
    r: f64,
    tau: f64,
    rho: f64,
    tau_p: f64,
    rho_p: f64,
}

impl BeamSplitterParams {
    pub const DEFAULT_TAU: f64 = 0.0;
    pub const DEFAULT_RHO: f64 = FRAC_PI_2;
    pub const DEFAULT_TAU_P: f64 = 0.0;
    pub const DEFAULT_RHO_P: f64 = FRAC_PI_2;

    pub fn new(t: f64, r: f64, tau: f64, rho: f64, tau_p: f64, rho_p: f64) -> Result<Self> {
        ensure_finite("beam splitter parameter", [t, r, tau, rho, tau_p, rho_p])?;
        if !(0.0..=1.0).contains(&t)
            || !(0.0..=1.0).contains(&r)
            || (t * t + r * r - 1.0).abs() > NORM_TOL
        {
            return Err(Error::BeamSplitterMagnitude { t, r });
        }
        let residual = phase_residual(tau, rho, tau_p, rho_p);
        if residual.abs() > UNITARY_TOL {
            return Err(Error::BeamSplitterPhase { residual });
        }
        Ok(Self {
            t,
            r,
            tau,
            rho,
            tau_p,
            rho_p,
        })
    }

    /// Magnitude `t`, with `r = √(1 − t²)` and the given phases.
    pub fn with_phases(t: f64, tau: f64, rho: f64, tau_p: f64, rho_p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::BeamSplitterMagnitude { t, r: f64::NAN });
        }
        Self::new(t, (1.0 - t * t).sqrt(), tau, rho, tau_p, rho_p)
    }

    /// Magnitude `t` with the default phase convention `τ = τ′ = 0, ρ = ρ′ = π/2`.
    pub fn from_transmission(t: f64) -> Result<Self> {
        Self::with_phases(
            t,
            Self::DEFAULT_TAU,
            Self::DEFAULT_RHO,
            Self::DEFAULT_TAU_P,
            Self::DEFAULT_RHO_P,
        )
    }

    /// Asymmetry `η = t²/r²` with the default phase convention.
    pub fn from_eta(eta: f64) -> Result<Self> {
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::InvalidInput(format!("eta must be positive, got {eta}")));
        }
        Self::new(
            (eta / (1.0 + eta)).sqrt(),
            (1.0 + eta).recip().sqrt(),
            Self::DEFAULT_TAU,
            Self::DEFAULT_RHO,
            Self::DEFAULT_TAU_P,
            Self::DEFAULT_RHO_P,
        )
    }

    /// Chooses `τ′` so the phase constraint holds exactly.
    pub fn with_free_phases(t: f64, tau: f64, rho: f64, rho_p: f64) -> Result<Self> {
        Self::with_phases(t, tau, rho, PI + rho + rho_p - tau, rho_p)
    }

    pub fn t(&self) -> f64 {
        self.t
    }
    pub fn r(&self) -> f64 {
        self.r
    }
    pub fn tau(&self) -> f64 {
        self.tau
    }
    pub fn rho(&self) -> f64 {
        self.rho
    }
    pub fn tau_p(&self) -> f64 {
        self.tau_p
    }
    pub fn rho_p(&self) -> f64 {
        self.rho_p
    }

    pub fn t_tilde(&self) -> C64 {
        C64::from_polar(self.t, self.tau)
    }
    pub fn r_tilde(&self) -> C64 {
        C64::from_polar(self.r, self.rho)
    }
    pub fn t_tilde_p(&self) -> C64 {
        C64::from_polar(self.t, self.tau_p)
    }
    pub fn r_tilde_p(&self) -> C64 {
        C64::from_polar(self.r, self.rho_p)
    }

    /// `η = t²/r²`, with boundary markers at `t = 0` and `r = 0`.
    pub fn eta(&self) -> Ratio {
        Ratio::of(self.t * self.t, self.r * self.r)
    }

    /// Phase offset `τ − ρ′` this splitter contributes to the interference phase.
    pub fn phase_offset(&self) -> f64 {
        self.tau - self.rho_p
    }

    /// Path-basis amplitudes to detector-basis amplitudes; see the module docs.
    pub fn detector_map(&self) -> LocalOperator {
        inverse_beam_splitter_operator(self).transpose()
    }
}

fn phase_residual(tau: f64, rho: f64, tau_p: f64, rho_p: f64) -> f64 {
    wrap_phase(tau + tau_p - rho - rho_p - PI)
}

/// The ket transform `[[t̃, r̃′], [r̃, t̃′]]`.
pub fn beam_splitter_operator(bs: &BeamSplitterParams) -> LocalOperator {
    LocalOperator::unitary([[bs.t_tilde(), bs.r_tilde_p()], [bs.r_tilde(), bs.t_tilde_p()]])
        .expect("validated beam splitter parameters give a unitary matrix")
}

/// `[[t̃′, −r̃′], [−r̃, t̃]]`: the inverse ket transform up to the factor `D⁻¹`.
pub fn inverse_beam_splitter_operator(bs: &BeamSplitterParams) -> LocalOperator {
    LocalOperator::unitary([
        [bs.t_tilde_p(), -bs.r_tilde_p()],
        [-bs.r_tilde(), bs.t_tilde()],
    ])
    .expect("validated beam splitter parameters give a unitary matrix")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbsorptivePlateParams {
    t1: C64,
    t2: C64,
}

impl AbsorptivePlateParams {
    pub fn new(t1: C64, t2: C64) -> Result<Self> {
        ensure_finite("plate transmission", [t1.re, t1.im, t2.re, t2.im])?;
        for t in [t1, t2] {
            if t.norm() > 1.0 + NORM_TOL {
                return Err(Error::UnphysicalGain { magnitude: t.norm() });
            }
        }
        if t1.norm_sqr() == 0.0 && t2.norm_sqr() == 0.0 {
            return Err(Error::TotalAbsorption);
        }
        Ok(Self { t1, t2 })
    }

    pub fn from_polar(m1: f64, phase1: f64, m2: f64, phase2: f64) -> Result<Self> {
        Self::new(C64::from_polar(m1, phase1), C64::from_polar(m2, phase2))
    }

    pub fn t1(&self) -> C64 {
        self.t1
    }

    pub fn t2(&self) -> C64 {
        self.t2
    }

    /// `ε = |T̃₁|²/|T̃₂|²` for an equally weighted input.
    pub fn epsilon(&self) -> Ratio {
        Ratio::of(self.t1.norm_sqr(), self.t2.norm_sqr())
    }

    /// Relative transmission phase `arg T̃₂ − arg T̃₁`, folded into `α`.
    pub fn relative_phase(&self) -> f64 {
        let a1 = if self.t1.norm_sqr() > 0.0 { self.t1.arg() } else { 0.0 };
        let a2 = if self.t2.norm_sqr() > 0.0 { self.t2.arg() } else { 0.0 };
        a2 - a1
    }
}

pub fn absorptive_plate_operator(plate: &AbsorptivePlateParams) -> LocalOperator {
    LocalOperator::diagonal(plate.t1, plate.t2).expect("validated plate amplitudes are finite")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Path {
    One,
    Two,
}

impl Path {
    pub fn from_index(index: u8) -> Option<Self> {
        match index {
            1 => Some(Path::One),
            2 => Some(Path::Two),
            _ => None,
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Path::One => 1,
            Path::Two => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseShifterParams {
    pub path: Path,
    pub phi: f64,
}

pub fn phase_shifter_operator(shifter: &PhaseShifterParams) -> LocalOperator {
    let one = C64::new(1.0, 0.0);
    let shift = C64::from_polar(1.0, shifter.phi);
    let (d1, d2) = match shifter.path {
        Path::One => (shift, one),
        Path::Two => (one, shift),
    };
    LocalOperator::unitary([[d1, C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), d2]])
        .expect("diagonal phases are unitary")
}

/// One stage of an arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Element {
    Plate(AbsorptivePlateParams),
    Phase(PhaseShifterParams),
    BeamSplitter(BeamSplitterParams),
    Bloch(BlochBasis),
}

impl Element {
    /// The amplitude map this element applies on its side.
    pub fn operator(&self) -> LocalOperator {
        match self {
            Element::Plate(p) => absorptive_plate_operator(p),
            Element::Phase(p) => phase_shifter_operator(p),
            Element::BeamSplitter(bs) => bs.detector_map(),
            Element::Bloch(b) => b.detector_map(),
        }
    }

    /// Beam splitters and Bloch bases switch the measurement basis.
    pub fn is_basis_change(&self) -> bool {
        matches!(self, Element::BeamSplitter(_) | Element::Bloch(_))
    }
}

/// Multiplies operators in listed order: the first element acts first.
pub fn compose_arm(elements: &[LocalOperator]) -> Result<LocalOperator> {
    let (first, rest) = elements
        .split_first()
        .ok_or_else(|| Error::InvalidInput("empty element sequence".into()))?;
    Ok(rest.iter().fold(*first, |acc, op| acc.then(op)))
}

/// A nonnegative ratio of squared magnitudes with explicit boundary markers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Ratio {
    Zero,
    Finite(f64),
    Infinite,
}

impl Ratio {
    pub fn of(num_sq: f64, den_sq: f64) -> Self {
        if num_sq == 0.0 {
            Ratio::Zero
        } else if den_sq == 0.0 {
            Ratio::Infinite
        } else {
            Ratio::Finite(num_sq / den_sq)
        }
    }

    pub fn value(&self) -> Option<f64> {
        match *self {
            Ratio::Finite(x) => Some(x),
            _ => None,
        }
    }

    pub fn is_interior(&self) -> bool {
        matches!(self, Ratio::Finite(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedParams {
    /// `ε = p²/q²`
    pub epsilon: Ratio,
    /// `η = t²/r²`
    pub eta: Ratio,
    /// `w = α + φ + 2(τ − ρ′)` in `(−π, π]`
    pub w: f64,
    pub alpha: f64,
}

/// Reduced parameters for an entangled source with the same splitter on both
/// sides and relative phase `phi = φ_A − φ_B`.
pub fn reduced_params(source: &SourceSpec, bs: &BeamSplitterParams, phi: f64) -> Result<ReducedParams> {
    match *source {
        SourceSpec::Entangled { p, q, alpha } => Ok(ReducedParams {
            epsilon: Ratio::of(p * p, q * q),
            eta: bs.eta(),
            w: wrap_phase(alpha + phi + 2.0 * bs.phase_offset()),
            alpha,
        }),
        SourceSpec::Product { .. } => Err(Error::NotApplicable(
            "reduced parameters are undefined for product sources".into(),
        )),
    }
}
