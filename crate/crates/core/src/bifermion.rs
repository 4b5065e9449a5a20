//! Spin-entangled fermion pairs `p|↑↓⟩ + q e^{iα}|↓↑⟩` measured along a Bloch
//! direction `e(χ, δ)`.
//!
//! The Bloch eigenstates are `|e⟩ = m|↑⟩ + n e^{iδ}|↓⟩` and
//! `|ē⟩ = n|↑⟩ − m e^{iδ}|↓⟩` with `m = cos(χ/2)`, `n = sin(χ/2)`. Measured
//! in that basis the pair splits into the branch amplitudes
//!
//! ```text
//! f̃ = (p + q̃) m n,   g̃ = p m² − q̃ n²,   h̃ = p n² − q̃ m²
//! ```
//!
//! on `|e,e⟩, |ē,ē⟩` (±f̃), `|e,ē⟩` (−g̃) and `|ē,e⟩` (h̃), up to the
//! overall `e^{−iδ}`. Results land in [`DetectionDistribution`] with
//! `e ↔ M` and `ē ↔ N`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::biphoton::{evolve_state, DetectionDistribution, Evolved};
use crate::error::{ensure_finite, Error, Result};
use crate::optics::{AbsorptivePlateParams, Element, Ratio};
use crate::quantum::{BipartiteState, LocalOperator, SingleParticleState, NORM_TOL};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochBasis {
    chi: f64,
    delta: f64,
}

impl BlochBasis {
    pub fn new(chi: f64, delta: f64) -> Result<Self> {
        ensure_finite("Bloch angle", [chi, delta])?;
        if !(0.0..=PI).contains(&chi) {
            return Err(Error::InvalidInput(format!("polar angle chi = {chi} outside [0, pi]")));
        }
        if !(0.0..TAU).contains(&delta) {
            return Err(Error::InvalidInput(format!("azimuth delta = {delta} outside [0, 2pi)")));
        }
        Ok(Self { chi, delta })
    }

    /// Basis with `η = m²/n² = cot²(χ/2)`.
    pub fn from_eta(eta: f64, delta: f64) -> Result<Self> {
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::InvalidInput(format!("eta must be positive, got {eta}")));
        }
        Self::new(2.0 * eta.sqrt().recip().atan(), delta)
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn m(&self) -> f64 {
        (self.chi / 2.0).cos()
    }

    pub fn n(&self) -> f64 {
        (self.chi / 2.0).sin()
    }

    pub fn eta(&self) -> Ratio {
        let (m, n) = (self.m(), self.n());
        if self.chi == PI {
            Ratio::Zero
        } else {
            Ratio::of(m * m, n * n)
        }
    }

    /// `(|e⟩, |ē⟩)` in terms of `(|↑⟩, |↓⟩)`.
    pub fn forward(&self) -> LocalOperator {
        let (m, n) = (self.m(), self.n());
        LocalOperator::unitary([
            [C64::new(m, 0.0), C64::from_polar(n, self.delta)],
            [C64::new(n, 0.0), C64::from_polar(-m, self.delta)],
        ])
        .expect("Bloch rotation is unitary")
    }

    /// `(|↑⟩, |↓⟩)` in terms of `(|e⟩, |ē⟩)`.
    pub fn inverse(&self) -> LocalOperator {
        let (m, n) = (self.m(), self.n());
        LocalOperator::unitary([
            [C64::new(m, 0.0), C64::new(n, 0.0)],
            [C64::from_polar(n, -self.delta), C64::from_polar(-m, -self.delta)],
        ])
        .expect("Bloch rotation is unitary")
    }

    /// Spin-basis amplitudes to Bloch-basis amplitudes.
    pub fn detector_map(&self) -> LocalOperator {
        self.inverse().transpose()
    }
}

pub fn bloch_rotation(basis: &BlochBasis) -> (LocalOperator, LocalOperator) {
    (basis.forward(), basis.inverse())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinSourceSpec {
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
}

impl SpinSourceSpec {
    pub fn new(p: f64, q: f64, alpha: f64) -> Result<Self> {
        ensure_finite("spin source parameter", [p, q, alpha])?;
        if p < 0.0 || q < 0.0 {
            return Err(Error::InvalidInput("p, q must be nonnegative".into()));
        }
        let sum = p * p + q * q;
        if (sum - 1.0).abs() > NORM_TOL {
            return Err(Error::SourceNotNormalized {
                detail: format!("p, q: squared amplitudes sum to {sum}"),
            });
        }
        Ok(Self { p, q, alpha })
    }

    pub fn from_epsilon(eps: f64, alpha: f64) -> Result<Self> {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::InvalidInput(format!("epsilon must be positive, got {eps}")));
        }
        Self::new((eps / (1.0 + eps)).sqrt(), (1.0 + eps).recip().sqrt(), alpha)
    }

    pub fn q_tilde(&self) -> C64 {
        C64::from_polar(self.q, self.alpha)
    }

    pub fn epsilon(&self) -> Ratio {
        Ratio::of(self.p * self.p, self.q * self.q)
    }

    /// `p|↑↓⟩ + q̃|↓↑⟩` as pair amplitudes.
    pub fn state(&self) -> BipartiteState {
        let zero = C64::new(0.0, 0.0);
        BipartiteState::new(zero, C64::new(self.p, 0.0), self.q_tilde(), zero)
            .expect("validated source is finite")
    }
}

/// Equally weighted pair through a single plate on side A (`T̃₁` on `↑`,
/// `T̃₂` on `↓`), post-selected on the A fermion surviving.
pub fn spin_source_from_plate(plate: &AbsorptivePlateParams) -> Result<(SpinSourceSpec, f64)> {
    let w1 = plate.t1().norm_sqr();
    let w2 = plate.t2().norm_sqr();
    let total = w1 + w2;
    if total == 0.0 {
        return Err(Error::TotalAbsorption);
    }
    let spec = SpinSourceSpec {
        p: (w1 / total).sqrt(),
        q: (w2 / total).sqrt(),
        alpha: plate.relative_phase(),
    };
    Ok((spec, total / 2.0))
}

/// `ε = |T̃₁|²/|T̃₂|²`, i.e. `p/q = |T̃₁|/|T̃₂|`.
pub fn fermion_plate_ratio(t1: C64, t2: C64) -> Result<Ratio> {
    let (w1, w2) = (t1.norm_sqr(), t2.norm_sqr());
    if w1 == 0.0 && w2 == 0.0 {
        return Err(Error::TotalAbsorption);
    }
    Ok(Ratio::of(w1, w2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchAmplitudes {
    pub f: C64,
    pub g: C64,
    pub h: C64,
}

impl BranchAmplitudes {
    pub fn norm_squared(&self) -> f64 {
        2.0 * self.f.norm_sqr() + self.g.norm_sqr() + self.h.norm_sqr()
    }
}

pub fn spin_branch_amplitudes(spec: &SpinSourceSpec, basis: &BlochBasis) -> BranchAmplitudes {
    let (m, n) = (basis.m(), basis.n());
    let p = C64::new(spec.p, 0.0);
    let q = spec.q_tilde();
    BranchAmplitudes {
        f: (p + q) * m * n,
        g: p * m * m - q * n * n,
        h: p * n * n - q * m * m,
    }
}

/// Amplitude route: `P⁺(e,e) = P⁺(ē,ē) = |f̃|²`, `P⁻(e,ē) = |g̃|²`, `P⁻(ē,e) = |h̃|²`.
pub fn spin_distribution(spec: &SpinSourceSpec, basis: &BlochBasis) -> DetectionDistribution {
    let b = spin_branch_amplitudes(spec, basis);
    let f2 = b.f.norm_sqr();
    DetectionDistribution::from_joint(f2, f2, b.g.norm_sqr(), b.h.norm_sqr())
}

/// The same four probabilities written in `ε = p²/q²`, `η = m²/n²`.
pub fn spin_distribution_reduced(eps: f64, eta: f64, alpha: f64) -> Result<DetectionDistribution> {
    positive(eps, eta)?;
    let se = eps.sqrt();
    let denom = (1.0 + eps) * (1.0 + eta).powi(2);
    let plus = eta * (eps + 1.0 + 2.0 * se * alpha.cos()) / denom;
    let cross = 2.0 * se * eta * alpha.cos();
    let e_ebar = (eps * eta * eta + 1.0 - cross) / denom;
    let ebar_e = (eps + eta * eta - cross) / denom;
    Ok(DetectionDistribution::from_joint(plus, plus, e_ebar, ebar_e))
}

fn positive(eps: f64, eta: f64) -> Result<()> {
    for (name, v) in [("epsilon", eps), ("eta", eta)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidInput(format!("{name} must be positive and finite, got {v}")));
        }
    }
    Ok(())
}

/// `(P(e), P(ē))` for either fermion.
pub fn spin_local_probabilities(eps: f64, eta: f64) -> Result<(f64, f64)> {
    positive(eps, eta)?;
    let denom = (1.0 + eps) * (1.0 + eta);
    Ok(((eps * eta + 1.0) / denom, (eps + eta) / denom))
}

/// `(V⁺, V⁻)`; the photon pair of visibilities with the roles swapped.
pub fn spin_visibilities(eps: f64, eta: f64) -> Result<(f64, f64)> {
    positive(eps, eta)?;
    let se = eps.sqrt();
    Ok((
        2.0 * se / (1.0 + eps),
        4.0 * eta * se / ((1.0 + eps) * (1.0 + eta * eta)),
    ))
}

/// State-vector route: source amplitudes through per-side Bloch rotations
/// (and an optional plate on side A), then post-selection.
pub fn evolve_spin(initial: &BipartiteState, arm_a: &[Element], arm_b: &[Element]) -> Result<Evolved> {
    evolve_state(initial, arm_a, arm_b, |e| {
        matches!(e, Element::Plate(_) | Element::Bloch(_))
    })
}

/// B's state after A is found in `|e⟩` (`a_outcome = 0`) or `|ē⟩` (`1`),
/// unnormalized.
pub fn conditional_b_state(state: &BipartiteState, a_outcome: usize) -> SingleParticleState {
    SingleParticleState::new(state.coeff(a_outcome, 0), state.coeff(a_outcome, 1))
        .expect("finite state gives finite conditional amplitudes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::biphoton::detection_distribution;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

    const H: f64 = FRAC_1_SQRT_2;

    fn engine(spec: &SpinSourceSpec, basis: &BlochBasis) -> DetectionDistribution {
        let arm = [Element::Bloch(*basis)];
        let ev = evolve_spin(&spec.state(), &arm, &arm).unwrap();
        detection_distribution(&ev.state).unwrap()
    }

    #[test]
    fn proper_basis_limit() {
        let b = BlochBasis::new(0.0, 1.3).unwrap();
        let (fwd, _) = bloch_rotation(&b);
        let m = fwd.matrix();
        assert_eq!(m[0][0], C64::new(1.0, 0.0));
        assert_eq!(m[0][1].norm(), 0.0);
        assert!((m[1][1] + C64::from_polar(1.0, 1.3)).norm() < 1e-15);
        assert_eq!(b.eta(), Ratio::Infinite);
        assert_eq!(BlochBasis::new(PI, 0.0).unwrap().eta(), Ratio::Zero);
    }

    #[test]
    fn equator_basis() {
        let b = BlochBasis::new(FRAC_PI_2, 0.0).unwrap();
        assert_abs_diff_eq!(b.m(), H, epsilon = 1e-15);
        assert_abs_diff_eq!(b.n(), H, epsilon = 1e-15);
        assert_abs_diff_eq!(b.eta().value().unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn basis_validation() {
        assert!(BlochBasis::new(-0.1, 0.0).is_err());
        assert!(BlochBasis::new(1.0, TAU).is_err());
        assert!(BlochBasis::new(f64::NAN, 0.0).is_err());
        let b = BlochBasis::from_eta(5.0, 0.0).unwrap();
        assert_abs_diff_eq!(b.eta().value().unwrap(), 5.0, epsilon = 1e-12);
    }

    #[test]
    fn branch_amplitude_examples() {
        let b = BlochBasis::new(FRAC_PI_2, 0.0).unwrap();
        let s = SpinSourceSpec::new(H, H, 0.0).unwrap();
        let br = spin_branch_amplitudes(&s, &b);
        assert_abs_diff_eq!(br.f.norm_sqr(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(br.g.norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(br.h.norm(), 0.0, epsilon = 1e-15);
        let d = spin_distribution(&s, &b);
        assert_abs_diff_eq!(d.p_plus, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.p_minus, 0.0, epsilon = 1e-15);

        let s = SpinSourceSpec::new(0.6, 0.8, 0.4).unwrap();
        let br = spin_branch_amplitudes(&s, &BlochBasis::new(0.0, 0.0).unwrap());
        assert_eq!(br.f.norm(), 0.0);
        assert!((br.g - C64::new(0.6, 0.0)).norm() < 1e-15);
        assert!((br.h + s.q_tilde()).norm() < 1e-15);
        let d = spin_distribution(&s, &BlochBasis::new(0.0, 0.0).unwrap());
        assert_abs_diff_eq!(d.p_mn, 0.36, epsilon = 1e-15);
        assert_abs_diff_eq!(d.p_nm, 0.64, epsilon = 1e-15);
        assert_eq!(d.p_plus, 0.0);
    }

    #[test]
    fn reduced_route_at_example_point() {
        let s = SpinSourceSpec::from_epsilon(4.0, 0.0).unwrap();
        let b = BlochBasis::from_eta(5.0, 0.0).unwrap();
        let amp = spin_distribution(&s, &b);
        let red = spin_distribution_reduced(4.0, 5.0, 0.0).unwrap();
        for (x, y) in amp.joint().iter().zip(red.joint()) {
            assert_abs_diff_eq!(*x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn printed_spin_forms_disagree_off_unit_eta() {
        use crate::closed_form::printed;
        let red = spin_distribution_reduced(4.0, 5.0, 0.5).unwrap();
        assert!((printed::spin_p_e_ebar(4.0, 5.0, 0.5) - red.p_mn).abs() > 1e-3);
        let red1 = spin_distribution_reduced(4.0, 1.0, 0.5).unwrap();
        assert_abs_diff_eq!(printed::spin_p_e_ebar(4.0, 1.0, 0.5), red1.p_mn, epsilon = 1e-15);
        assert_abs_diff_eq!(printed::spin_p_ebar_e(4.0, 1.0, 0.5), red1.p_nm, epsilon = 1e-15);
        assert_abs_diff_eq!(printed::spin_p_minus(4.0, 1.0, 0.5), red1.p_minus, epsilon = 1e-15);
    }

    #[test]
    fn local_and_visibility_examples() {
        assert_eq!(spin_local_probabilities(1.0, 1.0).unwrap(), (0.5, 0.5));
        let (e, eb) = spin_local_probabilities(4.0, 5.0).unwrap();
        assert_abs_diff_eq!(e, 0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(eb, 0.3, epsilon = 1e-15);
        assert_eq!(spin_visibilities(1.0, 3.0).unwrap().0, 1.0);
        assert_eq!(spin_visibilities(1.0, 1.0).unwrap(), (1.0, 1.0));
        assert!(spin_visibilities(0.0, 1.0).is_err());
        assert!(spin_local_probabilities(1.0, -1.0).is_err());
    }

    #[test]
    fn plate_ratio() {
        assert_eq!(fermion_plate_ratio(C64::new(0.5, 0.0), C64::new(0.0, 0.5)).unwrap(), Ratio::Finite(1.0));
        let r = fermion_plate_ratio(C64::new(0.9f64.sqrt(), 0.0), C64::new(0.1f64.sqrt(), 0.0)).unwrap();
        assert_abs_diff_eq!(r.value().unwrap(), 9.0, epsilon = 1e-12);
        assert_eq!(fermion_plate_ratio(C64::new(0.0, 0.0), C64::new(1.0, 0.0)).unwrap(), Ratio::Zero);
        assert_eq!(fermion_plate_ratio(C64::new(1.0, 0.0), C64::new(0.0, 0.0)).unwrap(), Ratio::Infinite);
        assert_eq!(
            fermion_plate_ratio(C64::new(0.0, 0.0), C64::new(0.0, 0.0)),
            Err(Error::TotalAbsorption)
        );
    }

    #[test]
    fn plate_source_matches_state_vector() {
        let plate = AbsorptivePlateParams::from_polar(0.9, 0.3, 0.3, -0.5).unwrap();
        let (spec, survival) = spin_source_from_plate(&plate).unwrap();
        let eq = SpinSourceSpec::new(H, H, 0.0).unwrap();
        let ev = evolve_spin(&eq.state(), &[Element::Plate(plate)], &[]).unwrap();
        assert_abs_diff_eq!(ev.survival, survival, epsilon = 1e-15);
        assert_abs_diff_eq!(survival, (0.81 + 0.09) / 2.0, epsilon = 1e-15);
        assert!(ev.state.equal_up_to_global_phase(&spec.state(), 1e-14).unwrap());
        assert_abs_diff_eq!(spec.epsilon().value().unwrap(), 9.0, epsilon = 1e-12);
    }

    #[test]
    fn rejects_splitters_in_spin_arms() {
        let bs = crate::optics::BeamSplitterParams::from_transmission(0.5).unwrap();
        let s = SpinSourceSpec::new(H, H, 0.0).unwrap();
        assert!(evolve_spin(&s.state(), &[Element::BeamSplitter(bs)], &[]).is_err());
    }

    fn spin_inputs() -> impl Strategy<Value = (SpinSourceSpec, BlochBasis)> {
        (0.01f64..0.99, -PI..PI, 0.01f64..PI - 0.01, 0.0f64..TAU).prop_map(|(p, alpha, chi, delta)| {
            (
                SpinSourceSpec::new(p, (1.0 - p * p).sqrt(), alpha).unwrap(),
                BlochBasis::new(chi, delta).unwrap(),
            )
        })
    }

    proptest! {
        #[test]
        fn forward_inverse_roundtrip(chi in 0.0f64..=PI, delta in 0.0f64..TAU, a in (-1.0f64..1.0, -1.0f64..1.0), b in (-1.0f64..1.0, -1.0f64..1.0)) {
            let basis = BlochBasis::new(chi, delta).unwrap();
            let (fwd, inv) = bloch_rotation(&basis);
            prop_assert!(fwd.matmul(&inv).approx_eq_up_to_phase(&LocalOperator::identity(), 1e-12));
            let s = SingleParticleState::new(C64::new(a.0, a.1), C64::new(b.0, b.1)).unwrap();
            let back = inv.apply(&fwd.apply(&s));
            prop_assert!((back.a1() - s.a1()).norm() <= 1e-12 && (back.a2() - s.a2()).norm() <= 1e-12);
        }

        #[test]
        fn branch_normalization((s, b) in spin_inputs()) {
            prop_assert!((spin_branch_amplitudes(&s, &b).norm_squared() - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn amplitude_route_matches_state_vector((s, b) in spin_inputs()) {
            let amp = spin_distribution(&s, &b);
            let sv = engine(&s, &b);
            for (x, y) in amp.joint().iter().zip(sv.joint()) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
            prop_assert!((amp.p_plus + amp.p_minus - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn azimuth_does_not_matter((s, b) in spin_inputs(), delta in 0.0f64..TAU) {
            let other = BlochBasis::new(b.chi(), delta).unwrap();
            let d1 = engine(&s, &b);
            let d2 = engine(&s, &other);
            for (x, y) in d1.joint().iter().zip(d2.joint()) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
        }

        #[test]
        fn collapse_on_e_matches_joint((s, b) in spin_inputs()) {
            let arm = [Element::Bloch(b)];
            let ev = evolve_spin(&s.state(), &arm, &arm).unwrap();
            let cond = conditional_b_state(&ev.state, 0);
            let br = spin_branch_amplitudes(&s, &b);
            // proportional to f̃|e⟩ − g̃|ē⟩
            let target = SingleParticleState::new(br.f, -br.g).unwrap();
            let overlap = cond.a1().conj() * target.a1() + cond.a2().conj() * target.a2();
            prop_assert!((overlap.norm() - cond.norm_squared().sqrt() * target.norm_squared().sqrt()).abs() <= 1e-12);
            let d = detection_distribution(&ev.state).unwrap();
            let p_cond = d.p_mm / (d.p_mm + d.p_mn);
            let f2 = br.f.norm_sqr();
            prop_assert!((p_cond - f2 / (f2 + br.g.norm_sqr())).abs() <= 1e-10);
        }
    }
}
