//! Monte Carlo click sampling with absorption and post-selection.
//!
//! Before the basis change every element is diagonal in the path (or spin)
//! basis, so a particle on path `j` reaches the basis change with probability
//! `|τ_j|²`, the product of its plate transmissions. Absorption therefore
//! acts as a which-path measurement and the event space splits exactly into
//! three absorption tags plus the four detector pairs of the surviving,
//! still coherent, state.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::biphoton::DetectionDistribution;
use crate::circuit::Experiment;
use crate::dsl::CircuitConfig;
use crate::error::{Error, Result};

/// Events per RNG stream. Fixed so that results do not depend on the number
/// of worker threads.
pub const BLOCK_SIZE: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClickOutcome {
    #[serde(rename = "MM")]
    MM,
    #[serde(rename = "NN")]
    NN,
    #[serde(rename = "MN")]
    MN,
    #[serde(rename = "NM")]
    NM,
    #[serde(rename = "absorbed_A")]
    AbsorbedA,
    #[serde(rename = "absorbed_B")]
    AbsorbedB,
    #[serde(rename = "absorbed_both")]
    AbsorbedBoth,
}

impl ClickOutcome {
    pub const ALL: [ClickOutcome; 7] = [
        ClickOutcome::MM,
        ClickOutcome::NN,
        ClickOutcome::MN,
        ClickOutcome::NM,
        ClickOutcome::AbsorbedA,
        ClickOutcome::AbsorbedB,
        ClickOutcome::AbsorbedBoth,
    ];

    pub const DETECTOR: [ClickOutcome; 4] = [ClickOutcome::MM, ClickOutcome::NN, ClickOutcome::MN, ClickOutcome::NM];

    pub fn tag(self) -> &'static str {
        match self {
            ClickOutcome::MM => "MM",
            ClickOutcome::NN => "NN",
            ClickOutcome::MN => "MN",
            ClickOutcome::NM => "NM",
            ClickOutcome::AbsorbedA => "absorbed_A",
            ClickOutcome::AbsorbedB => "absorbed_B",
            ClickOutcome::AbsorbedBoth => "absorbed_both",
        }
    }

    pub fn is_detection(self) -> bool {
        Self::DETECTOR.contains(&self)
    }

    fn index(self) -> usize {
        self as usize
    }

    /// Post-selected probability of a detector tag.
    pub fn exact(self, d: &DetectionDistribution) -> Option<f64> {
        match self {
            ClickOutcome::MM => Some(d.p_mm),
            ClickOutcome::NN => Some(d.p_nn),
            ClickOutcome::MN => Some(d.p_mn),
            ClickOutcome::NM => Some(d.p_nm),
            _ => None,
        }
    }
}

/// Unconditional probability of each of the seven outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventModel {
    /// Indexed like [`ClickOutcome::ALL`].
    pub probabilities: [f64; 7],
}

impl EventModel {
    pub fn from_experiment(exp: &Experiment) -> Result<Self> {
        let [ta, tb] = exp.path_transmissions();
        let c = exp.source_state().probabilities();
        let (mut abs_a, mut abs_b, mut abs_both) = (0.0, 0.0, 0.0);
        for j in 0..2 {
            for k in 0..2 {
                let w = c[2 * j + k];
                let (sa, sb) = (ta[j], tb[k]);
                abs_a += w * (1.0 - sa) * sb;
                abs_b += w * sa * (1.0 - sb);
                abs_both += w * (1.0 - sa) * (1.0 - sb);
            }
        }
        let survival = match exp.distribution() {
            Ok(d) => Some(d),
            Err(Error::TotalAbsorption) => None,
            Err(e) => return Err(e),
        };
        let (s, [mm, mn, nm, nn]) = match survival {
            Some(d) => (d.survival, d.joint()),
            None => (0.0, [0.0; 4]),
        };
        Ok(Self {
            probabilities: [s * mm, s * nn, s * mn, s * nm, abs_a, abs_b, abs_both],
        })
    }

    pub fn survival(&self) -> f64 {
        self.probabilities[..4].iter().sum()
    }

    fn cumulative(&self) -> [f64; 7] {
        let total: f64 = self.probabilities.iter().sum();
        let mut acc = 0.0;
        let mut out = [0.0; 7];
        for (o, p) in out.iter_mut().zip(self.probabilities) {
            acc += p / total;
            *o = acc;
        }
        out[6] = f64::INFINITY;
        out
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ClickOutcome {
        draw(&self.cumulative(), rng)
    }
}

fn draw<R: Rng + ?Sized>(cumulative: &[f64; 7], rng: &mut R) -> ClickOutcome {
    let u: f64 = rng.gen();
    let i = cumulative.iter().position(|&c| u < c).unwrap_or(6);
    ClickOutcome::ALL[i]
}

/// One event of the experiment described by `config`.
pub fn sample_event<R: Rng + ?Sized>(config: &CircuitConfig, rng: &mut R) -> Result<ClickOutcome> {
    Ok(EventModel::from_experiment(&Experiment::from_config(config)?)?.sample(rng))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimates {
    pub p_mm: f64,
    pub p_nn: f64,
    pub p_mn: f64,
    pub p_nm: f64,
}

impl Estimates {
    pub fn get(&self, tag: ClickOutcome) -> Option<f64> {
        match tag {
            ClickOutcome::MM => Some(self.p_mm),
            ClickOutcome::NN => Some(self.p_nn),
            ClickOutcome::MN => Some(self.p_mn),
            ClickOutcome::NM => Some(self.p_nm),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentCounts {
    /// Indexed like [`ClickOutcome::ALL`].
    pub counts: [u64; 7],
    pub n_total: u64,
    pub n_surviving: u64,
    /// `None` when no event survived.
    pub estimates: Option<Estimates>,
    pub seed: u64,
}

impl ExperimentCounts {
    pub fn from_counts(counts: [u64; 7], seed: u64) -> Self {
        let n_total = counts.iter().sum();
        let n_surviving: u64 = counts[..4].iter().sum();
        let estimates = (n_surviving > 0).then(|| {
            let f = |c: u64| c as f64 / n_surviving as f64;
            Estimates {
                p_mm: f(counts[0]),
                p_nn: f(counts[1]),
                p_mn: f(counts[2]),
                p_nm: f(counts[3]),
            }
        });
        Self {
            counts,
            n_total,
            n_surviving,
            estimates,
            seed,
        }
    }

    pub fn count(&self, tag: ClickOutcome) -> u64 {
        self.counts[tag.index()]
    }

    pub fn survival_fraction(&self) -> f64 {
        self.n_surviving as f64 / self.n_total as f64
    }

    /// JSON with per-tag counts keyed by tag name.
    pub fn to_json_value(&self) -> serde_json::Value {
        let counts: serde_json::Map<String, serde_json::Value> = ClickOutcome::ALL
            .iter()
            .map(|t| (t.tag().to_string(), self.count(*t).into()))
            .collect();
        serde_json::json!({
            "counts": counts,
            "n_total": self.n_total,
            "n_surviving": self.n_surviving,
            "survival_fraction": self.survival_fraction(),
            "estimates": self.estimates,
            "seed": self.seed,
        })
    }
}

fn run_block(cumulative: &[f64; 7], seed: u64, block: u64, len: u64) -> [u64; 7] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    let mut counts = [0u64; 7];
    for _ in 0..len {
        counts[draw(cumulative, &mut rng).index()] += 1;
    }
    counts
}

/// `n` independent events. Block `b` of [`BLOCK_SIZE`] events draws from
/// ChaCha8 stream `b` of `seed`, so the counts depend only on
/// `(config, n, seed)`.
pub fn run_experiment(config: &CircuitConfig, n: u64, seed: u64) -> Result<ExperimentCounts> {
    run_model(&EventModel::from_experiment(&Experiment::from_config(config)?)?, n, seed)
}

pub fn run_model(model: &EventModel, n: u64, seed: u64) -> Result<ExperimentCounts> {
    if n == 0 {
        return Err(Error::InvalidInput("sample n must be at least 1".into()));
    }
    let cumulative = model.cumulative();
    let blocks = n.div_ceil(BLOCK_SIZE);
    let counts = (0..blocks)
        .into_par_iter()
        .map(|b| run_block(&cumulative, seed, b, BLOCK_SIZE.min(n - b * BLOCK_SIZE)))
        .reduce(
            || [0u64; 7],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    Ok(ExperimentCounts::from_counts(counts, seed))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum ZScore {
    Z(f64),
    /// The exact probability is 0 or 1; reports whether the estimate equals it.
    ExactMatch(bool),
}

impl ZScore {
    fn of(estimate: f64, exact: f64, n: u64) -> Self {
        if exact <= 0.0 || exact >= 1.0 {
            ZScore::ExactMatch(estimate == exact.clamp(0.0, 1.0))
        } else {
            ZScore::Z((estimate - exact) / (exact * (1.0 - exact) / n as f64).sqrt())
        }
    }

    /// `|z| < bound`, or an exact match.
    pub fn within(&self, bound: f64) -> bool {
        match *self {
            ZScore::Z(z) => z.abs() < bound,
            ZScore::ExactMatch(ok) => ok,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TagCheck {
    pub tag: ClickOutcome,
    pub estimate: f64,
    pub exact: f64,
    pub z: ZScore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub tags: Vec<TagCheck>,
    pub survival: TagCheck,
}

impl ConsistencyReport {
    pub fn all_within(&self, bound: f64) -> bool {
        self.tags.iter().all(|t| t.z.within(bound)) && self.survival.z.within(bound)
    }
}

/// Binomial z-score of each detector-tag estimate against the exact
/// post-selected probability, plus the survival fraction against the exact
/// survival.
pub fn consistency_report(counts: &ExperimentCounts, exact: &DetectionDistribution) -> Result<ConsistencyReport> {
    let est = counts
        .estimates
        .ok_or_else(|| Error::InvalidInput("no surviving events".into()))?;
    let tags = ClickOutcome::DETECTOR
        .iter()
        .map(|&tag| {
            let (estimate, p) = (est.get(tag).unwrap(), tag.exact(exact).unwrap());
            TagCheck {
                tag,
                estimate,
                exact: p,
                z: ZScore::of(estimate, p, counts.n_surviving),
            }
        })
        .collect();
    let s = counts.survival_fraction();
    Ok(ConsistencyReport {
        tags,
        survival: TagCheck {
            tag: ClickOutcome::AbsorbedBoth,
            estimate: s,
            exact: exact.survival,
            z: ZScore::of(s, exact.survival, counts.n_total),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::photon_config;
    use crate::dsl::{ElementDecl, PlateAmplitude, SourceDecl};
    use approx::assert_abs_diff_eq;

    fn z(r: &ConsistencyReport, tag: ClickOutcome) -> ZScore {
        r.tags.iter().find(|t| t.tag == tag).unwrap().z
    }

    #[test]
    fn balanced_w0_only_plus_tags() {
        // default splitter phases add 2(τ − ρ′) = −π
        let c = photon_config(1.0, 1.0, std::f64::consts::PI);
        assert_abs_diff_eq!(Experiment::from_config(&c).unwrap().interference_phase(), 0.0, epsilon = 1e-15);
        let counts = run_experiment(&c, 200_000, 3).unwrap();
        assert_eq!(counts.count(ClickOutcome::MN) + counts.count(ClickOutcome::NM), 0);
        assert_eq!(counts.n_surviving, counts.n_total);
        let est = counts.estimates.unwrap();
        assert!((est.p_mm - 0.5).abs() < 5.0 * (0.25f64 / 200_000.0).sqrt());
        assert_abs_diff_eq!(est.p_mm + est.p_nn + est.p_mn + est.p_nm, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn deterministic_and_counts_sum() {
        let c = photon_config(4.0, 5.0, 0.4);
        let a = run_experiment(&c, 150_000, 11).unwrap();
        let b = run_experiment(&c, 150_000, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.counts.iter().sum::<u64>(), 150_000);
        assert_ne!(a, run_experiment(&c, 150_000, 12).unwrap());
    }

    #[test]
    fn boundary_plate_halves_survival() {
        let mut c = photon_config(1.0, 1.0, 0.0);
        c.source = SourceDecl::Plates {
            t1: PlateAmplitude::real(1.0),
            t2: PlateAmplitude::real(0.0),
        };
        let exp = Experiment::from_config(&c).unwrap();
        let m = EventModel::from_experiment(&exp).unwrap();
        assert_abs_diff_eq!(m.survival(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(m.probabilities[4], 0.5, epsilon = 1e-15);
        let d = exp.distribution().unwrap();
        // surviving pairs behave as |1,1⟩: each photon is 50/50 and uncorrelated
        for p in d.joint() {
            assert_abs_diff_eq!(p, 0.25, epsilon = 1e-15);
        }
    }

    #[test]
    fn plates_on_both_sides_split_absorption_tags() {
        let mut c = photon_config(1.0, 1.0, 0.0);
        let plate = ElementDecl::Plate {
            t1: PlateAmplitude::real(0.8f64.sqrt()),
            t2: PlateAmplitude::real(0.2f64.sqrt()),
        };
        c.side_a.insert(0, plate);
        c.side_b.insert(0, plate);
        let m = EventModel::from_experiment(&Experiment::from_config(&c).unwrap()).unwrap();
        // branch 11 survives with 0.64, branch 22 with 0.04
        assert_abs_diff_eq!(m.survival(), 0.5 * (0.64 + 0.04), epsilon = 1e-15);
        assert_abs_diff_eq!(m.probabilities[4], 0.5 * (0.2 * 0.8 + 0.8 * 0.2), epsilon = 1e-15);
        assert_abs_diff_eq!(m.probabilities[5], m.probabilities[4], epsilon = 1e-15);
        assert_abs_diff_eq!(m.probabilities[6], 0.5 * (0.04 + 0.64), epsilon = 1e-15);
        assert_abs_diff_eq!(m.probabilities.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn total_absorption_yields_no_estimates() {
        let mut c = photon_config(1.0, 1.0, 0.0);
        c.side_a.insert(
            0,
            ElementDecl::Plate {
                t1: PlateAmplitude::real(1.0),
                t2: PlateAmplitude::real(0.0),
            },
        );
        c.side_b.insert(
            0,
            ElementDecl::Plate {
                t1: PlateAmplitude::real(0.0),
                t2: PlateAmplitude::real(1.0),
            },
        );
        let counts = run_experiment(&c, 1000, 1).unwrap();
        assert_eq!(counts.n_surviving, 0);
        assert!(counts.estimates.is_none());
    }

    #[test]
    fn z_scores_on_synthetic_counts() {
        let exact = DetectionDistribution::from_joint(0.25, 0.25, 0.25, 0.25);
        let counts = ExperimentCounts::from_counts([2500, 2500, 2500, 2500, 0, 0, 0], 0);
        let r = consistency_report(&counts, &exact).unwrap();
        for t in &r.tags {
            assert_eq!(t.z, ZScore::Z(0.0));
        }
        assert_eq!(r.survival.z, ZScore::ExactMatch(true));
        // +3σ on MM: σ = sqrt(0.25·0.75/10000) = 0.0043301…, i.e. ~43.3 counts
        let sigma = (0.25f64 * 0.75 / 10_000.0).sqrt();
        let shift = (3.0 * sigma * 10_000.0).round() as u64;
        let counts = ExperimentCounts::from_counts([2500 + shift, 2500 - shift, 2500, 2500, 0, 0, 0], 0);
        let r = consistency_report(&counts, &exact).unwrap();
        match z(&r, ClickOutcome::MM) {
            ZScore::Z(v) => assert!((v - 3.0).abs() < 0.05, "{v}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn json_uses_tag_names() {
        let counts = ExperimentCounts::from_counts([1, 2, 3, 4, 5, 6, 7], 9);
        let v = counts.to_json_value();
        assert_eq!(v["counts"]["absorbed_both"], 7);
        assert_eq!(v["n_total"], 28);
        assert_eq!(v["n_surviving"], 10);
    }
}
