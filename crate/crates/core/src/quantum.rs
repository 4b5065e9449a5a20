//! Complex-amplitude arithmetic for one particle (two modes) and for a pair
//! (four product modes).
//!
//! Basis index 0 is the first element of every two-element basis used in the
//! crate (path 1, detector M, spin up, Bloch state e); index 1 is the second
//! (path 2, detector N, spin down, ē). Pair amplitudes are stored row-major in
//! (A, B): `[c11, c12, c21, c22]`.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::C64;

/// Tolerance on `Σ|c|² = 1` for states treated as normalized.
pub const NORM_TOL: f64 = 1e-12;
/// Elementwise tolerance on `M†M = I` for operators flagged unitary.
pub const UNITARY_TOL: f64 = 1e-10;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

fn finite(z: &C64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingleParticleState {
    amps: [C64; 2],
}

impl SingleParticleState {
    pub fn new(a1: C64, a2: C64) -> Result<Self> {
        if !(finite(&a1) && finite(&a2)) {
            return Err(Error::NonFinite("single-particle amplitude"));
        }
        Ok(Self { amps: [a1, a2] })
    }

    pub fn a1(&self) -> C64 {
        self.amps[0]
    }

    pub fn a2(&self) -> C64 {
        self.amps[1]
    }

    pub fn amplitudes(&self) -> [C64; 2] {
        self.amps
    }

    pub fn norm_squared(&self) -> f64 {
        self.amps.iter().map(C64::norm_sqr).sum()
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            amps: [self.amps[0] * factor, self.amps[1] * factor],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BipartiteState {
    c: [C64; 4],
}

/// Result of post-selection renormalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalized {
    pub state: BipartiteState,
    /// Probability weight retained by post-selection (the input norm squared).
    pub survival: f64,
}

impl Normalized {
    /// A survival above one cannot come out of a physical pipeline; the
    /// caller passed a state that was never normalized to begin with.
    pub fn violates_contract(&self) -> bool {
        self.survival > 1.0 + NORM_TOL
    }
}

impl BipartiteState {
    pub fn new(c11: C64, c12: C64, c21: C64, c22: C64) -> Result<Self> {
        Self::from_array([c11, c12, c21, c22])
    }

    pub fn from_array(c: [C64; 4]) -> Result<Self> {
        if !c.iter().all(finite) {
            return Err(Error::NonFinite("bipartite amplitude"));
        }
        Ok(Self { c })
    }

    pub fn from_real(c: [f64; 4]) -> Result<Self> {
        Self::from_array(c.map(|x| C64::new(x, 0.0)))
    }

    /// Amplitude of `|j⟩_A |k⟩_B`, zero-based indices.
    pub fn coeff(&self, j: usize, k: usize) -> C64 {
        self.c[2 * j + k]
    }

    pub fn amplitudes(&self) -> [C64; 4] {
        self.c
    }

    pub fn probabilities(&self) -> [f64; 4] {
        self.c.map(|z| z.norm_sqr())
    }

    pub fn norm_squared(&self) -> f64 {
        self.c.iter().map(C64::norm_sqr).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_squared() - 1.0).abs() <= NORM_TOL
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            c: self.c.map(|z| z * factor),
        }
    }

    /// `(op_a ⊗ op_b) |ψ⟩`. The result is not renormalized.
    #[allow(clippy::needless_range_loop)]
    pub fn apply_local(&self, op_a: &LocalOperator, op_b: &LocalOperator) -> Self {
        let a = &op_a.m;
        let b = &op_b.m;
        let mut out = [ZERO; 4];
        for j in 0..2 {
            for k in 0..2 {
                let mut acc = ZERO;
                for jj in 0..2 {
                    for kk in 0..2 {
                        acc += a[j][jj] * b[k][kk] * self.c[2 * jj + kk];
                    }
                }
                out[2 * j + k] = acc;
            }
        }
        Self { c: out }
    }

    pub fn normalize(&self) -> Result<Normalized> {
        let survival = self.norm_squared();
        if survival == 0.0 {
            return Err(Error::TotalAbsorption);
        }
        let scale = C64::new(survival.sqrt().recip(), 0.0);
        Ok(Normalized {
            state: self.scale(scale),
            survival,
        })
    }

    pub fn inner(&self, other: &Self) -> C64 {
        self.c
            .iter()
            .zip(other.c.iter())
            .map(|(x, y)| x.conj() * y)
            .sum()
    }

    /// True iff `|⟨a|b⟩| ≥ 1 − tol`; both states must be normalized.
    pub fn equal_up_to_global_phase(&self, other: &Self, tol: f64) -> Result<bool> {
        for s in [self, other] {
            if !s.is_normalized() {
                return Err(Error::NotNormalized {
                    norm_squared: s.norm_squared(),
                });
            }
        }
        Ok(self.inner(other).norm() >= 1.0 - tol)
    }
}

pub fn tensor(a: &SingleParticleState, b: &SingleParticleState) -> BipartiteState {
    let [a1, a2] = a.amps;
    let [b1, b2] = b.amps;
    BipartiteState {
        c: [a1 * b1, a1 * b2, a2 * b1, a2 * b2],
    }
}

/// A 2×2 operator acting on one side's two modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalOperator {
    m: [[C64; 2]; 2],
    unitary: bool,
}

impl LocalOperator {
    pub fn identity() -> Self {
        Self {
            m: [[ONE, ZERO], [ZERO, ONE]],
            unitary: true,
        }
    }

    /// Builds an operator with no unitarity claim.
    pub fn general(m: [[C64; 2]; 2]) -> Result<Self> {
        ensure_finite("operator entry", m.iter().flatten().flat_map(|z| [z.re, z.im]))?;
        Ok(Self { m, unitary: false })
    }

    /// Builds an operator and checks `M†M = I` to [`UNITARY_TOL`].
    pub fn unitary(m: [[C64; 2]; 2]) -> Result<Self> {
        let mut op = Self::general(m)?;
        let deviation = op.unitarity_deviation();
        if deviation > UNITARY_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        op.unitary = true;
        Ok(op)
    }

    pub fn diagonal(d1: C64, d2: C64) -> Result<Self> {
        Self::general([[d1, ZERO], [ZERO, d2]])
    }

    pub fn matrix(&self) -> [[C64; 2]; 2] {
        self.m
    }

    pub fn is_unitary(&self) -> bool {
        self.unitary
    }

    /// Largest elementwise deviation of `M†M` from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        let prod = self.adjoint().matmul(self);
        let mut worst: f64 = 0.0;
        for j in 0..2 {
            for k in 0..2 {
                let target = if j == k { ONE } else { ZERO };
                worst = worst.max((prod.m[j][k] - target).norm());
            }
        }
        worst
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.m;
        Self {
            m: [[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]],
            unitary: self.unitary,
        }
    }

    pub fn transpose(&self) -> Self {
        let m = &self.m;
        Self {
            m: [[m[0][0], m[1][0]], [m[0][1], m[1][1]]],
            unitary: self.unitary,
        }
    }

    pub fn determinant(&self) -> C64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// Plain matrix product `self · rhs`.
    pub fn matmul(&self, rhs: &Self) -> Self {
        let a = &self.m;
        let b = &rhs.m;
        let mut m = [[ZERO; 2]; 2];
        for (j, row) in m.iter_mut().enumerate() {
            for (k, entry) in row.iter_mut().enumerate() {
                *entry = a[j][0] * b[0][k] + a[j][1] * b[1][k];
            }
        }
        Self {
            m,
            unitary: self.unitary && rhs.unitary,
        }
    }

    /// The operator that applies `self` first and `next` afterwards.
    pub fn then(&self, next: &Self) -> Self {
        next.matmul(self)
    }

    pub fn apply(&self, state: &SingleParticleState) -> SingleParticleState {
        let [a1, a2] = state.amps;
        SingleParticleState {
            amps: [
                self.m[0][0] * a1 + self.m[0][1] * a2,
                self.m[1][0] * a1 + self.m[1][1] * a2,
            ],
        }
    }

    /// Elementwise comparison after removing the best global phase.
    pub fn approx_eq_up_to_phase(&self, other: &Self, tol: f64) -> bool {
        let overlap: C64 = self
            .m
            .iter()
            .flatten()
            .zip(other.m.iter().flatten())
            .map(|(x, y)| x.conj() * y)
            .sum();
        let phase = if overlap.norm() > 0.0 {
            overlap / overlap.norm()
        } else {
            ONE
        };
        self.m
            .iter()
            .flatten()
            .zip(other.m.iter().flatten())
            .all(|(x, y)| (x * phase - y).norm() <= tol)
    }
}
