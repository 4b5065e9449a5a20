//! Randomized reconciliation of the state-vector engines against the closed
//! forms, plus the normalization and symmetry invariants.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bifermion::{spin_branch_amplitudes, spin_distribution, spin_distribution_reduced, BlochBasis, SpinSourceSpec};
use crate::biphoton::{detection_distribution, evolve, DetectionDistribution, SourceSpec};
use crate::closed_form::{joint_probabilities, local_probabilities};
use crate::error::Result;
use crate::optics::{BeamSplitterParams, Element, Path, PhaseShifterParams};

/// One random bi-photon setup: identical splitters, shifter `φ_A` on A path 2
/// and `φ_B` on B path 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotonCase {
    pub eps: f64,
    pub eta: f64,
    pub alpha: f64,
    pub phi_a: f64,
    pub phi_b: f64,
    pub tau: f64,
    pub rho: f64,
    pub rho_p: f64,
}

fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    10f64.powf(rng.gen_range(lo.log10()..=hi.log10()))
}

fn phase<R: Rng>(rng: &mut R) -> f64 {
    rng.gen_range(-PI..PI)
}

impl PhotonCase {
    /// ε, η log-uniform in `[1e-3, 1e3]`; all phases uniform.
    pub fn random<R: Rng>(rng: &mut R) -> Self {
        Self {
            eps: log_uniform(rng, 1e-3, 1e3),
            eta: log_uniform(rng, 1e-3, 1e3),
            alpha: phase(rng),
            phi_a: phase(rng),
            phi_b: phase(rng),
            tau: phase(rng),
            rho: phase(rng),
            rho_p: phase(rng),
        }
    }

    pub fn splitter(&self) -> Result<BeamSplitterParams> {
        BeamSplitterParams::with_free_phases((self.eta / (1.0 + self.eta)).sqrt(), self.tau, self.rho, self.rho_p)
    }

    pub fn w(&self) -> f64 {
        self.alpha + self.phi_a - self.phi_b + 2.0 * (self.tau - self.rho_p)
    }

    /// State-vector route.
    pub fn engine(&self) -> Result<DetectionDistribution> {
        let bs = self.splitter()?;
        let spec = SourceSpec::from_epsilon(self.eps, self.alpha)?;
        let arm_a = [
            Element::Phase(PhaseShifterParams {
                path: Path::Two,
                phi: self.phi_a,
            }),
            Element::BeamSplitter(bs),
        ];
        let arm_b = [
            Element::Phase(PhaseShifterParams {
                path: Path::One,
                phi: self.phi_b,
            }),
            Element::BeamSplitter(bs),
        ];
        let ev = evolve(&spec, &arm_a, &arm_b)?;
        Ok(detection_distribution(&ev.state)?.with_survival(ev.survival))
    }
}

/// Largest absolute difference between the engine distribution and the
/// closed forms over every joint, aggregate and local field.
pub fn photon_deviation(case: &PhotonCase, d: &DetectionDistribution) -> Result<f64> {
    let cf = joint_probabilities(case.eps, case.eta, case.w())?;
    let (m, n, _) = local_probabilities(case.eps, case.eta)?;
    let pairs = [
        (d.p_mm, cf.p_mm),
        (d.p_nn, cf.p_nn),
        (d.p_mn, cf.p_mn),
        (d.p_nm, cf.p_nm),
        (d.p_plus, cf.p_plus),
        (d.p_minus, cf.p_minus),
        (d.delta_p_plus, cf.delta_p_plus),
        (d.delta_p_pm, cf.delta_p_pm),
        (d.local_a_m, m),
        (d.local_a_n, n),
        (d.local_b_m, m),
        (d.local_b_n, n),
    ];
    Ok(pairs.iter().map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

/// `max(|P⁺ + P⁻ − 1|, |ΣP − 1|)`.
pub fn normalization_error(d: &DetectionDistribution) -> f64 {
    let joint: f64 = d.joint().iter().sum();
    (d.p_plus + d.p_minus - 1.0).abs().max((joint - 1.0).abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FermionCase {
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    pub chi: f64,
    pub delta: f64,
}

impl FermionCase {
    pub fn random<R: Rng>(rng: &mut R) -> Self {
        let theta: f64 = rng.gen_range(1e-3..(PI / 2.0 - 1e-3));
        Self {
            p: theta.cos(),
            q: theta.sin(),
            alpha: phase(rng),
            chi: rng.gen_range(1e-3..(PI - 1e-3)),
            delta: rng.gen_range(0.0..2.0 * PI),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FermionCheck {
    /// Amplitude route vs `(ε, η)` route.
    pub dual_route: f64,
    /// Amplitude route at `δ` vs at `δ = 0`.
    pub delta_invariance: f64,
    /// `|2|f̃|² + |g̃|² + |h̃|² − 1|`
    pub branch_norm: f64,
}

fn max_joint_diff(a: &DetectionDistribution, b: &DetectionDistribution) -> f64 {
    a.joint()
        .iter()
        .zip(b.joint())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn fermion_check(case: &FermionCase) -> Result<FermionCheck> {
    let spec = SpinSourceSpec::new(case.p, case.q, case.alpha)?;
    let basis = BlochBasis::new(case.chi, case.delta)?;
    let amp = spin_distribution(&spec, &basis);
    let eps = case.p * case.p / (case.q * case.q);
    let eta = basis.eta().value().unwrap_or(f64::INFINITY);
    let reduced = spin_distribution_reduced(eps, eta, case.alpha)?;
    let flat = spin_distribution(&spec, &BlochBasis::new(case.chi, 0.0)?);
    Ok(FermionCheck {
        dual_route: max_joint_diff(&amp, &reduced),
        delta_invariance: max_joint_diff(&amp, &flat),
        branch_norm: (spin_branch_amplitudes(&spec, &basis).norm_squared() - 1.0).abs(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub cases: usize,
    pub seed: u64,
    pub max_photon_deviation: f64,
    pub max_normalization_error: f64,
    /// `P(M,M) ↔ P(N,N)` under `ε → 1/ε`, `P(M,N)` unchanged.
    pub max_inversion_asymmetry: f64,
    pub max_fermion_dual_route: f64,
    pub max_delta_variation: f64,
    pub max_branch_norm_error: f64,
    pub tolerance: f64,
}

impl VerifyReport {
    pub fn max_deviation(&self) -> f64 {
        [
            self.max_photon_deviation,
            self.max_normalization_error,
            self.max_inversion_asymmetry,
            self.max_fermion_dual_route,
            self.max_delta_variation,
            self.max_branch_norm_error,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.max_deviation() < self.tolerance
    }
}

/// Runs `cases` random photon and fermion cases from `seed`.
pub fn run_verification(cases: usize, seed: u64) -> Result<VerifyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = VerifyReport {
        cases,
        seed,
        max_photon_deviation: 0.0,
        max_normalization_error: 0.0,
        max_inversion_asymmetry: 0.0,
        max_fermion_dual_route: 0.0,
        max_delta_variation: 0.0,
        max_branch_norm_error: 0.0,
        tolerance: 1e-9,
    };
    for _ in 0..cases {
        let case = PhotonCase::random(&mut rng);
        let d = case.engine()?;
        r.max_photon_deviation = r.max_photon_deviation.max(photon_deviation(&case, &d)?);
        r.max_normalization_error = r.max_normalization_error.max(normalization_error(&d));
        let inv = PhotonCase {
            eps: 1.0 / case.eps,
            ..case
        }
        .engine()?;
        let asym = [(d.p_mm, inv.p_nn), (d.p_nn, inv.p_mm), (d.p_mn, inv.p_mn), (d.p_nm, inv.p_nm)]
            .iter()
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        r.max_inversion_asymmetry = r.max_inversion_asymmetry.max(asym);

        let f = fermion_check(&FermionCase::random(&mut rng))?;
        r.max_fermion_dual_route = r.max_fermion_dual_route.max(f.dual_route);
        r.max_delta_variation = r.max_delta_variation.max(f.delta_invariance);
        r.max_branch_norm_error = r.max_branch_norm_error.max(f.branch_norm);
    }
    Ok(r)
}
