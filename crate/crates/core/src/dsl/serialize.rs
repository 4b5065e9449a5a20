use std::fmt::Write;

use super::config::{CircuitConfig, ElementDecl, PlateAmplitude, Side, SourceDecl};

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn plate(t: &PlateAmplitude) -> String {
    format!("{}@{}", num(t.magnitude), num(t.phase))
}

/// Canonical text: fixed statement and key order, 17 significant digits,
/// phases in radians, LF line endings.
pub fn serialize(config: &CircuitConfig) -> String {
    let mut out = String::new();
    out.push_str("version 1\n");
    let _ = writeln!(out, "system {}", config.system.keyword());
    match config.source {
        SourceDecl::Entangled { p, q, alpha } => {
            let _ = writeln!(out, "source entangled p={} q={} alpha={}", num(p), num(q), num(alpha));
        }
        SourceDecl::Product {
            mu,
            nu,
            mu_p,
            nu_p,
            phi_a,
            phi_b,
        } => {
            let _ = writeln!(
                out,
                "source product mu={} nu={} mu_p={} nu_p={} phi_a={} phi_b={}",
                num(mu),
                num(nu),
                num(mu_p),
                num(nu_p),
                num(phi_a),
                num(phi_b)
            );
        }
        SourceDecl::Plates { t1, t2 } => {
            let _ = writeln!(out, "source plates T1={} T2={}", plate(&t1), plate(&t2));
        }
    }
    for side in [Side::A, Side::B] {
        let _ = writeln!(out, "side {} {{", side.label());
        for el in config.side(side) {
            let _ = match *el {
                ElementDecl::Plate { t1, t2 } => writeln!(out, "  ap T1={} T2={}", plate(&t1), plate(&t2)),
                ElementDecl::Phase { path, phi } => writeln!(out, "  phase path={path} phi={}", num(phi)),
                ElementDecl::BeamSplitter {
                    t,
                    tau,
                    rho,
                    tau_p,
                    rho_p,
                } => writeln!(
                    out,
                    "  bs t={} tau={} rho={} tau_p={} rho_p={}",
                    num(t),
                    num(tau),
                    num(rho),
                    num(tau_p),
                    num(rho_p)
                ),
                ElementDecl::Bloch { chi, delta } => {
                    writeln!(out, "  bloch chi={} delta={}", num(chi), num(delta))
                }
            };
        }
        out.push_str("}\n");
    }
    if let Some(sweep) = config.sweep {
        let _ = writeln!(out, "sweep {} points={}", sweep.variable.keyword(), sweep.points);
    }
    if let Some(s) = config.sampler {
        let _ = writeln!(out, "sample n={} seed={}", s.n, s.seed);
    }
    out
}
