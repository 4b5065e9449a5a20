//! Builds engine inputs from a [`CircuitConfig`] and runs them.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::bifermion::{BlochBasis, SpinSourceSpec};
use crate::biphoton::{build_source, detection_distribution, evolve_state, DetectionDistribution, Evolved, SourceSpec};
use crate::dsl::{validate, CircuitConfig, ElementDecl, PlateAmplitude, Severity, SourceDecl, SweepVariable, System};
use crate::error::{Error, Result};
use crate::optics::{
    wrap_phase, AbsorptivePlateParams, BeamSplitterParams, Element, Path, PhaseShifterParams, Ratio, ReducedParams,
};
use crate::quantum::{BipartiteState, LocalOperator};

/// A validated configuration turned into a source state and two element
/// pipelines. A plate-derived source becomes the equally weighted state with
/// the plate prepended to arm A, so survival accounts for it.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    config: CircuitConfig,
    source: BipartiteState,
    arm_a: Vec<Element>,
    arm_b: Vec<Element>,
}

fn renormalized(a: f64, b: f64) -> (f64, f64) {
    let n = a.hypot(b);
    (a / n, b / n)
}

fn plate(t1: &PlateAmplitude, t2: &PlateAmplitude) -> Result<Element> {
    Ok(Element::Plate(AbsorptivePlateParams::from_polar(
        t1.magnitude,
        t1.phase,
        t2.magnitude,
        t2.phase,
    )?))
}

fn element(decl: &ElementDecl) -> Result<Element> {
    Ok(match *decl {
        ElementDecl::Plate { t1, t2 } => plate(&t1, &t2)?,
        ElementDecl::Phase { path, phi } => Element::Phase(PhaseShifterParams {
            path: Path::from_index(path).ok_or_else(|| Error::InvalidInput(format!("bad path {path}")))?,
            phi,
        }),
        ElementDecl::BeamSplitter {
            t,
            tau,
            rho,
            tau_p,
            rho_p,
        } => Element::BeamSplitter(BeamSplitterParams::with_phases(t.clamp(0.0, 1.0), tau, rho, tau_p, rho_p)?),
        ElementDecl::Bloch { chi, delta } => Element::Bloch(BlochBasis::new(chi, delta)?),
    })
}

fn equal_weight_state(system: System) -> BipartiteState {
    let h = FRAC_1_SQRT_2;
    match system {
        System::Photon => BipartiteState::from_real([h, 0.0, 0.0, h]),
        System::Fermion => BipartiteState::from_real([0.0, h, h, 0.0]),
    }
    .expect("constant state is finite")
}

impl Experiment {
    pub fn from_config(config: &CircuitConfig) -> Result<Self> {
        let errors: Vec<String> = validate(config)
            .into_iter()
            .filter(|f| f.severity == Severity::Error)
            .map(|f| f.message)
            .collect();
        if !errors.is_empty() {
            return Err(Error::InvalidInput(errors.join("; ")));
        }
        let mut arm_a = Vec::with_capacity(config.side_a.len() + 1);
        let source = match (config.system, config.source) {
            (System::Photon, SourceDecl::Entangled { p, q, alpha }) => {
                let (p, q) = renormalized(p, q);
                build_source(&SourceSpec::entangled(p, q, alpha)?)
            }
            (System::Fermion, SourceDecl::Entangled { p, q, alpha }) => {
                let (p, q) = renormalized(p, q);
                SpinSourceSpec::new(p, q, alpha)?.state()
            }
            (
                System::Photon,
                SourceDecl::Product {
                    mu,
                    nu,
                    mu_p,
                    nu_p,
                    phi_a,
                    phi_b,
                },
            ) => {
                let (mu, nu) = renormalized(mu, nu);
                let (mu_p, nu_p) = renormalized(mu_p, nu_p);
                build_source(&SourceSpec::product(mu, nu, mu_p, nu_p, phi_a, phi_b)?)
            }
            (System::Fermion, SourceDecl::Product { .. }) => {
                return Err(Error::InvalidInput("product sources are photon-only".into()))
            }
            (system, SourceDecl::Plates { t1, t2 }) => {
                arm_a.push(plate(&t1, &t2)?);
                equal_weight_state(system)
            }
        };
        for decl in &config.side_a {
            arm_a.push(element(decl)?);
        }
        let arm_b = config.side_b.iter().map(element).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            config: config.clone(),
            source,
            arm_a,
            arm_b,
        })
    }

    pub fn config(&self) -> &CircuitConfig {
        &self.config
    }

    pub fn system(&self) -> System {
        self.config.system
    }

    /// Normalized state as emitted, before any element.
    pub fn source_state(&self) -> &BipartiteState {
        &self.source
    }

    pub fn arm_a(&self) -> &[Element] {
        &self.arm_a
    }

    pub fn arm_b(&self) -> &[Element] {
        &self.arm_b
    }

    fn allow(&self) -> impl Fn(&Element) -> bool + Copy {
        let fermion = self.config.system == System::Fermion;
        move |e: &Element| match e {
            Element::Bloch(_) => fermion,
            Element::Plate(_) => true,
            Element::Phase(_) | Element::BeamSplitter(_) => !fermion,
        }
    }

    pub fn evolve(&self) -> Result<Evolved> {
        evolve_state(&self.source, &self.arm_a, &self.arm_b, self.allow())
    }

    /// Post-selected joint and local probabilities; `survival` is the
    /// probability that neither particle was absorbed.
    pub fn distribution(&self) -> Result<DetectionDistribution> {
        let ev = self.evolve()?;
        Ok(detection_distribution(&ev.state)?.with_survival(ev.survival))
    }

    /// Squared transmission of everything before the basis change, per side
    /// and path: `[[A path 1, A path 2], [B path 1, B path 2]]`.
    pub fn path_transmissions(&self) -> [[f64; 2]; 2] {
        let diag = |arm: &[Element]| {
            let pre: Vec<Element> = arm.iter().copied().filter(|e| !e.is_basis_change()).collect();
            let m = crate::biphoton::arm_operator(&pre).matrix();
            [m[0][0].norm_sqr(), m[1][1].norm_sqr()]
        };
        [diag(&self.arm_a), diag(&self.arm_b)]
    }

    /// State just before the basis change on each side, post-selected.
    pub fn pre_measurement_state(&self) -> Result<BipartiteState> {
        let strip = |arm: &[Element]| arm.iter().copied().filter(|e| !e.is_basis_change()).collect::<Vec<_>>();
        Ok(evolve_state(&self.source, &strip(&self.arm_a), &strip(&self.arm_b), self.allow())?.state)
    }

    /// Effective interference phase: `α` plus every shifter and plate phase
    /// (path 2 counts `+`, path 1 `−`), plus `τ − ρ′` per side with a
    /// splitter. For fermions only `α` and plate phases enter.
    pub fn interference_phase(&self) -> f64 {
        let mut w = match self.config.source {
            SourceDecl::Entangled { alpha, .. } => alpha,
            SourceDecl::Product { .. } | SourceDecl::Plates { .. } => 0.0,
        };
        for el in self.arm_a.iter().chain(&self.arm_b) {
            w += match el {
                Element::Plate(p) => p.relative_phase(),
                Element::Phase(s) => match s.path {
                    Path::One => -s.phi,
                    Path::Two => s.phi,
                },
                Element::BeamSplitter(bs) => bs.phase_offset(),
                Element::Bloch(_) => 0.0,
            };
        }
        wrap_phase(w)
    }

    /// `(ε, η, w)` when the pre-measurement state is entangled and both sides
    /// end in the same basis change.
    pub fn reduced_params(&self) -> Result<ReducedParams> {
        let not = |why: &str| Error::NotApplicable(why.to_string());
        let pre = self.pre_measurement_state()?;
        let [c11, c12, c21, c22] = pre.probabilities();
        let epsilon = match self.config.system {
            System::Photon if c12 == 0.0 && c21 == 0.0 => Ratio::of(c11, c22),
            System::Fermion if c11 == 0.0 && c22 == 0.0 => Ratio::of(c12, c21),
            _ => return Err(not("state is not of the two-branch entangled form")),
        };
        if matches!(self.config.source, SourceDecl::Product { .. }) {
            return Err(not("reduced parameters are undefined for product sources"));
        }
        let eta = match (self.arm_a.last(), self.arm_b.last()) {
            (Some(Element::BeamSplitter(a)), Some(Element::BeamSplitter(b))) if a.t() == b.t() => a.eta(),
            (Some(Element::Bloch(a)), Some(Element::Bloch(b))) if a.chi() == b.chi() => a.eta(),
            _ => return Err(not("both sides need the same basis change")),
        };
        let w = self.interference_phase();
        Ok(ReducedParams {
            epsilon,
            eta,
            w,
            alpha: w,
        })
    }

    /// Same experiment with the swept variable set to `x`.
    ///
    /// * `alpha` replaces the source phase (for a plate source, the phase of
    ///   `T2` relative to `T1`).
    /// * `phi` adds a shifter on A path 2 just before the basis change.
    /// * `w` shifts the source phase so that [`Self::interference_phase`]
    ///   equals `x`.
    pub fn with_sweep(&self, variable: SweepVariable, x: f64) -> Result<Self> {
        let mut config = self.config.clone();
        match variable {
            SweepVariable::Alpha | SweepVariable::W => {
                let target = match variable {
                    SweepVariable::W => self.source_alpha()? + (x - self.interference_phase()),
                    _ => x,
                };
                match &mut config.source {
                    SourceDecl::Entangled { alpha, .. } => *alpha = target,
                    SourceDecl::Plates { t1, t2 } => t2.phase = t1.phase + target,
                    SourceDecl::Product { .. } => {
                        return Err(Error::NotApplicable(format!(
                            "cannot sweep `{}` for a product source",
                            variable.keyword()
                        )))
                    }
                }
            }
            SweepVariable::Phi => {
                if config.system == System::Fermion {
                    return Err(Error::NotApplicable("fermion configs have no phase shifters".into()));
                }
                let at = config
                    .side_a
                    .iter()
                    .position(ElementDecl::is_basis_change)
                    .unwrap_or(config.side_a.len());
                config.side_a.insert(at, ElementDecl::Phase { path: 2, phi: x });
            }
        }
        Self::from_config(&config)
    }

    fn source_alpha(&self) -> Result<f64> {
        match self.config.source {
            SourceDecl::Entangled { alpha, .. } => Ok(alpha),
            SourceDecl::Plates { t1, t2 } => Ok(t2.phase - t1.phase),
            SourceDecl::Product { .. } => Err(Error::NotApplicable("product sources have no alpha".into())),
        }
    }
}

/// Parse-free convenience: validate, build and evaluate.
pub fn simulate(config: &CircuitConfig) -> Result<DetectionDistribution> {
    Experiment::from_config(config)?.distribution()
}

/// The single arm operator of a side, exposed for diagnostics.
pub fn arm_matrix(arm: &[Element]) -> LocalOperator {
    crate::biphoton::arm_operator(arm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::{joint_probabilities, rto_probabilities};
    use crate::dsl::{parse, SweepDecl};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn t_of(eta: f64) -> f64 {
        (eta / (1.0 + eta)).sqrt()
    }

    fn entangled(eps: f64, eta: f64, alpha: f64) -> CircuitConfig {
        let p = (eps / (1.0 + eps)).sqrt();
        let q = (1.0 + eps).recip().sqrt();
        CircuitConfig::photon_entangled(p, q, alpha, t_of(eta))
    }

    #[test]
    fn rto_config_matches_closed_form() {
        let text = "system photon\nsource entangled p=0.70710678 q=0.70710678 alpha=0\nside A {\n bs t=0.70710678\n}\nside B {\n bs t=0.70710678\n}\nsweep w\n";
        let exp = Experiment::from_config(&parse(text).unwrap()).unwrap();
        let r = exp.reduced_params().unwrap();
        assert_abs_diff_eq!(r.epsilon.value().unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.eta.value().unwrap(), 1.0, epsilon = 1e-7);
        for k in 0..=36 {
            let w = -PI + k as f64 * PI / 18.0;
            let d = exp.with_sweep(SweepVariable::W, w).unwrap().distribution().unwrap();
            let (plus, minus) = rto_probabilities(w);
            assert_abs_diff_eq!(d.p_mm, plus, epsilon = 1e-7);
            assert_abs_diff_eq!(d.p_mn, minus, epsilon = 1e-7);
        }
    }

    #[test]
    fn w_sweep_lands_on_requested_phase() {
        let exp = Experiment::from_config(&entangled(4.0, 5.0, 0.3)).unwrap();
        for x in [-PI, -1.0, 0.0, 2.5, PI] {
            let e = exp.with_sweep(SweepVariable::W, x).unwrap();
            assert_abs_diff_eq!(wrap_phase(e.interference_phase() - x), 0.0, epsilon = 1e-12);
            let d = e.distribution().unwrap();
            let cf = joint_probabilities(4.0, 5.0, x).unwrap();
            assert_abs_diff_eq!(d.p_mm, cf.p_mm, epsilon = 1e-12);
            assert_abs_diff_eq!(d.p_nn, cf.p_nn, epsilon = 1e-12);
            assert_abs_diff_eq!(d.p_mn, cf.p_mn, epsilon = 1e-12);
        }
    }

    #[test]
    fn phi_sweep_equals_w_sweep_shift() {
        let exp = Experiment::from_config(&entangled(2.0, 0.5, 0.0)).unwrap();
        let w0 = exp.interference_phase();
        for phi in [-2.0, 0.4, 1.9] {
            let a = exp.with_sweep(SweepVariable::Phi, phi).unwrap();
            assert_abs_diff_eq!(wrap_phase(a.interference_phase() - w0 - phi), 0.0, epsilon = 1e-12);
            let b = exp.with_sweep(SweepVariable::W, w0 + phi).unwrap();
            let (da, db) = (a.distribution().unwrap(), b.distribution().unwrap());
            assert_abs_diff_eq!(da.p_mm, db.p_mm, epsilon = 1e-12);
            assert_abs_diff_eq!(da.p_nm, db.p_nm, epsilon = 1e-12);
        }
    }

    #[test]
    fn plate_source_survival_and_epsilon() {
        let mut c = entangled(1.0, 1.0, 0.0);
        c.source = SourceDecl::Plates {
            t1: PlateAmplitude::real(0.8f64.sqrt()),
            t2: PlateAmplitude::real(0.2f64.sqrt()),
        };
        let exp = Experiment::from_config(&c).unwrap();
        let d = exp.distribution().unwrap();
        assert_abs_diff_eq!(d.survival, 0.5, epsilon = 1e-12);
        let r = exp.reduced_params().unwrap();
        assert_abs_diff_eq!(r.epsilon.value().unwrap(), 4.0, epsilon = 1e-12);
        let [a, b] = exp.path_transmissions();
        assert_abs_diff_eq!(a[0], 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(a[1], 0.2, epsilon = 1e-15);
        assert_eq!(b, [1.0, 1.0]);
    }

    #[test]
    fn total_absorption_is_reported() {
        let mut c = entangled(1.0, 1.0, 0.0);
        c.source = SourceDecl::Plates {
            t1: PlateAmplitude::real(0.0),
            t2: PlateAmplitude::real(0.0),
        };
        assert!(matches!(Experiment::from_config(&c), Err(Error::TotalAbsorption)));
        let mut c = entangled(1.0, 1.0, 0.0);
        c.side_a.insert(
            0,
            ElementDecl::Plate {
                t1: PlateAmplitude::real(0.0),
                t2: PlateAmplitude::real(0.0),
            },
        );
        assert!(matches!(Experiment::from_config(&c), Err(Error::TotalAbsorption)));
    }

    #[test]
    fn fermion_config_matches_reduced_route() {
        let text = "system fermion\nsource entangled p=0.6 q=0.8 alpha=0.7\nside A {\n bloch chi=1.1 delta=2\n}\nside B {\n bloch chi=1.1 delta=2\n}\n";
        let exp = Experiment::from_config(&parse(text).unwrap()).unwrap();
        let r = exp.reduced_params().unwrap();
        let (eps, eta) = (r.epsilon.value().unwrap(), r.eta.value().unwrap());
        let d = exp.distribution().unwrap();
        let e = crate::bifermion::spin_distribution_reduced(eps, eta, r.w).unwrap();
        assert_abs_diff_eq!(d.p_mm, e.p_mm, epsilon = 1e-12);
        assert_abs_diff_eq!(d.p_mn, e.p_mn, epsilon = 1e-12);
        assert_abs_diff_eq!(d.p_nm, e.p_nm, epsilon = 1e-12);
        assert_abs_diff_eq!(r.w, 0.7, epsilon = 1e-15);
    }

    #[test]
    fn invalid_config_is_rejected() {
        let mut c = entangled(1.0, 1.0, 0.0);
        c.sweep = Some(SweepDecl {
            variable: SweepVariable::W,
            points: 2,
        });
        assert!(matches!(Experiment::from_config(&c), Err(Error::InvalidInput(_))));
    }
}
