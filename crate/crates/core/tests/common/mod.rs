#![allow(dead_code)]

use std::f64::consts::PI;

use cohere_core::dsl::{
    validate, CircuitConfig, ElementDecl, PlateAmplitude, SamplerDecl, SourceDecl, SweepDecl, SweepVariable, System,
};
use rand::seq::SliceRandom;
use rand::Rng;

fn phase<R: Rng>(rng: &mut R) -> f64 {
    rng.gen_range(-PI..PI)
}

fn unit_pair<R: Rng>(rng: &mut R) -> (f64, f64) {
    let theta: f64 = rng.gen_range(0.0..PI / 2.0);
    (theta.cos(), theta.sin())
}

fn plate_amp<R: Rng>(rng: &mut R) -> PlateAmplitude {
    PlateAmplitude {
        magnitude: rng.gen_range(0.05..=1.0),
        phase: if rng.gen_bool(0.5) { 0.0 } else { phase(rng) },
    }
}

fn plate<R: Rng>(rng: &mut R) -> ElementDecl {
    ElementDecl::Plate {
        t1: plate_amp(rng),
        t2: plate_amp(rng),
    }
}

fn splitter<R: Rng>(rng: &mut R) -> ElementDecl {
    let t: f64 = rng.gen_range(0.0..=1.0);
    if rng.gen_bool(0.3) {
        return ElementDecl::splitter(t);
    }
    let (tau, rho, rho_p) = (phase(rng), phase(rng), phase(rng));
    ElementDecl::BeamSplitter {
        t,
        tau,
        rho,
        tau_p: PI + rho + rho_p - tau,
        rho_p,
    }
}

fn bloch<R: Rng>(rng: &mut R) -> ElementDecl {
    ElementDecl::Bloch {
        chi: rng.gen_range(0.0..=PI),
        delta: rng.gen_range(0.0..2.0 * PI),
    }
}

fn photon_side<R: Rng>(rng: &mut R) -> Vec<ElementDecl> {
    let mut side = Vec::new();
    for _ in 0..rng.gen_range(0..=3) {
        side.push(if rng.gen_bool(0.5) {
            plate(rng)
        } else {
            ElementDecl::Phase {
                path: rng.gen_range(1..=2),
                phi: phase(rng),
            }
        });
    }
    if rng.gen_bool(0.85) {
        side.push(splitter(rng));
    }
    side
}

/// A random configuration that passes validation.
pub fn random_config<R: Rng>(rng: &mut R) -> CircuitConfig {
    let system = *[System::Photon, System::Fermion].choose(rng).unwrap();
    let source = match (system, rng.gen_range(0..3)) {
        (System::Photon, 1) => {
            let (mu, nu) = unit_pair(rng);
            let (mu_p, nu_p) = unit_pair(rng);
            SourceDecl::Product {
                mu,
                nu,
                mu_p,
                nu_p,
                phi_a: phase(rng),
                phi_b: phase(rng),
            }
        }
        (_, 2) => SourceDecl::Plates {
            t1: plate_amp(rng),
            t2: plate_amp(rng),
        },
        _ => {
            let (p, q) = unit_pair(rng);
            SourceDecl::Entangled { p, q, alpha: phase(rng) }
        }
    };
    let (side_a, side_b) = match system {
        System::Photon => (photon_side(rng), photon_side(rng)),
        System::Fermion => {
            let mut a = Vec::new();
            if !matches!(source, SourceDecl::Plates { .. }) && rng.gen_bool(0.5) {
                a.push(plate(rng));
            }
            if rng.gen_bool(0.9) {
                a.push(bloch(rng));
            }
            let b = if rng.gen_bool(0.9) { vec![bloch(rng)] } else { Vec::new() };
            (a, b)
        }
    };
    let product = matches!(source, SourceDecl::Product { .. });
    let sweep = rng.gen_bool(0.6).then(|| {
        let choices: &[SweepVariable] = match (system, product) {
            (System::Fermion, _) => &[SweepVariable::W, SweepVariable::Alpha],
            (System::Photon, true) => &[SweepVariable::Phi],
            (System::Photon, false) => &[SweepVariable::W, SweepVariable::Phi, SweepVariable::Alpha],
        };
        SweepDecl {
            variable: *choices.choose(rng).unwrap(),
            points: rng.gen_range(8..=2000),
        }
    });
    let sampler = rng.gen_bool(0.5).then(|| SamplerDecl {
        n: rng.gen_range(1..=u64::MAX / 2),
        seed: rng.gen(),
    });
    let config = CircuitConfig {
        system,
        source,
        side_a,
        side_b,
        sweep,
        sampler,
    };
    let findings = validate(&config);
    assert!(findings.is_empty(), "generator produced invalid config: {findings:?}\n{config:?}");
    config
}

pub const RTO_TEXT: &str = "\
system photon
source entangled p=0.70710678 q=0.70710678 alpha=0
side A {
  bs t=0.70710678
}
side B {
  bs t=0.70710678
}
sweep w
";

/// Text mutations used by the fuzz runs: random bytes, or a valid file with
/// bytes flipped, dropped or duplicated.
pub fn fuzz_input<R: Rng>(rng: &mut R, seed_texts: &[String]) -> Vec<u8> {
    if rng.gen_bool(0.4) {
        let len = rng.gen_range(0..256);
        return (0..len).map(|_| rng.gen()).collect();
    }
    let mut bytes = seed_texts.choose(rng).unwrap().as_bytes().to_vec();
    for _ in 0..rng.gen_range(1..=6) {
        if bytes.is_empty() {
            break;
        }
        let i = rng.gen_range(0..bytes.len());
        match rng.gen_range(0..4) {
            0 => bytes[i] = rng.gen(),
            1 => {
                bytes.remove(i);
            }
            2 => {
                let b = *b"={}@#\n\r pi-e.0123456789".choose(rng).unwrap();
                bytes.insert(i, b);
            }
            _ => bytes.truncate(i),
        }
    }
    bytes
}
