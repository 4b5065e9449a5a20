//! Analytic probabilities and visibilities as functions of `(ε, η, w)`.
//!
//! The public functions use the forms that agree with the state-vector
//! engine. The cross terms carry `2√ε·η cos w` (and `4η√ε` in `V⁺`); the
//! typeset variants with `√(εη)` are kept in [`printed`] so the
//! reconciliation tests can show they disagree with the engine away from
//! `η = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check(eps: f64, eta: f64) -> Result<()> {
    for (name, v) in [("epsilon", eps), ("eta", eta)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidInput(format!("{name} must be positive and finite, got {v}")));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormReport {
    pub p_mm: f64,
    pub p_nn: f64,
    pub p_mn: f64,
    pub p_nm: f64,
    pub p_plus: f64,
    pub p_minus: f64,
    pub delta_p_plus: f64,
    pub delta_p_pm: f64,
    pub v_plus: f64,
    pub v_minus: f64,
}

/// Equal weights and symmetric splitters: `(¼(1 + cos w), ¼(1 − cos w))`,
/// the per-pair probability of each (+) and each (−) correlation.
pub fn rto_probabilities(w: f64) -> (f64, f64) {
    (0.25 * (1.0 + w.cos()), 0.25 * (1.0 - w.cos()))
}

pub fn joint_probabilities(eps: f64, eta: f64, w: f64) -> Result<ClosedFormReport> {
    check(eps, eta)?;
    let se = eps.sqrt();
    let denom = (1.0 + eps) * (1.0 + eta).powi(2);
    let cross = 2.0 * se * eta * w.cos();
    let p_mm = (1.0 + eps * eta * eta + cross) / denom;
    let p_nn = (eps + eta * eta + cross) / denom;
    let p_mn = eta / (1.0 + eta).powi(2) * (1.0 - 2.0 * se / (1.0 + eps) * w.cos());
    let (p_plus, p_minus, delta_p_plus, delta_p_pm) = aggregate_probabilities(eps, eta, w)?;
    let (v_plus, v_minus) = visibilities(eps, eta)?;
    Ok(ClosedFormReport {
        p_mm,
        p_nn,
        p_mn,
        p_nm: p_mn,
        p_plus,
        p_minus,
        delta_p_plus,
        delta_p_pm,
        v_plus,
        v_minus,
    })
}

/// `(P⁺, P⁻, ΔP⁺, ΔP±)`.
pub fn aggregate_probabilities(eps: f64, eta: f64, w: f64) -> Result<(f64, f64, f64, f64)> {
    check(eps, eta)?;
    let se = eps.sqrt();
    let eta1 = (1.0 + eta).powi(2);
    let p_plus = ((1.0 + eps) * (1.0 + eta * eta) + 4.0 * eta * se * w.cos()) / ((1.0 + eps) * eta1);
    let p_minus = 2.0 * eta / eta1 * (1.0 - 2.0 * se / (1.0 + eps) * w.cos());
    let delta_p_plus = (1.0 - eps) * (1.0 - eta) / ((1.0 + eps) * (1.0 + eta));
    let delta_p_pm = ((1.0 - eta).powi(2) + 8.0 * eta * se / (1.0 + eps) * w.cos()) / eta1;
    Ok((p_plus, p_minus, delta_p_plus, delta_p_pm))
}

/// `(P(M), P(N), P(M) − P(N))` for either photon. No phase enters.
pub fn local_probabilities(eps: f64, eta: f64) -> Result<(f64, f64, f64)> {
    check(eps, eta)?;
    let denom = (1.0 + eps) * (1.0 + eta);
    Ok((
        (1.0 + eps * eta) / denom,
        (eps + eta) / denom,
        (1.0 - eps) * (1.0 - eta) / denom,
    ))
}

/// `(V⁺, V⁻)`: periodic amplitude over constant term of `P⁺(w)` and `P⁻(w)`.
pub fn visibilities(eps: f64, eta: f64) -> Result<(f64, f64)> {
    check(eps, eta)?;
    let se = eps.sqrt();
    Ok((
        4.0 * eta * se / ((1.0 + eps) * (1.0 + eta * eta)),
        2.0 * se / (1.0 + eps),
    ))
}

/// Typeset variants whose cross terms read `√(εη)` instead of `√ε·η`.
pub mod printed {
    pub fn p_mm(eps: f64, eta: f64, w: f64) -> f64 {
        (1.0 + eps * eta * eta + 2.0 * (eps * eta).sqrt() * w.cos())
            / ((1.0 + eps) * (1.0 + eta).powi(2))
    }

    pub fn p_nn(eps: f64, eta: f64, w: f64) -> f64 {
        (eps + eta * eta + 2.0 * (eps * eta).sqrt() * w.cos()) / ((1.0 + eps) * (1.0 + eta).powi(2))
    }

    pub fn v_plus(eps: f64, eta: f64) -> f64 {
        4.0 * (eps * eta).sqrt() / ((1.0 + eps) * (1.0 + eta * eta))
    }

    /// Spin `P⁻(e, ē)`.
    pub fn spin_p_e_ebar(eps: f64, eta: f64, alpha: f64) -> f64 {
        (eps * eta * eta + 1.0 - 2.0 * (eps * eta).sqrt() * alpha.cos())
            / ((1.0 + eps) * (1.0 + eta).powi(2))
    }

    /// Spin `P⁻(ē, e)`.
    pub fn spin_p_ebar_e(eps: f64, eta: f64, alpha: f64) -> f64 {
        (eps + eta * eta - 2.0 * (eps * eta).sqrt() * alpha.cos()) / ((1.0 + eps) * (1.0 + eta).powi(2))
    }

    /// Spin `P⁻` total.
    pub fn spin_p_minus(eps: f64, eta: f64, alpha: f64) -> f64 {
        (1.0 + eta * eta - 4.0 * (eps * eta).sqrt() / (1.0 + eps) * alpha.cos()) / (1.0 + eta).powi(2)
    }

    /// Spin `V⁻`.
    pub fn spin_v_minus(eps: f64, eta: f64) -> f64 {
        v_plus(eps, eta)
    }
}
