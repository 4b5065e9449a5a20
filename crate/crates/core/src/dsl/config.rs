use serde::{Deserialize, Serialize};

use crate::optics::BeamSplitterParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum System {
    Photon,
    Fermion,
}

impl System {
    pub fn keyword(self) -> &'static str {
        match self {
            System::Photon => "photon",
            System::Fermion => "fermion",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn label(self) -> &'static str {
        match self {
            Side::A => "A",
            Side::B => "B",
        }
    }
}

/// Plate transmission written as `magnitude@phase`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlateAmplitude {
    pub magnitude: f64,
    pub phase: f64,
}

impl PlateAmplitude {
    pub fn real(magnitude: f64) -> Self {
        Self { magnitude, phase: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceDecl {
    Entangled {
        p: f64,
        q: f64,
        alpha: f64,
    },
    Product {
        mu: f64,
        nu: f64,
        mu_p: f64,
        nu_p: f64,
        phi_a: f64,
        phi_b: f64,
    },
    /// Equally weighted source followed by plates on side A.
    Plates {
        t1: PlateAmplitude,
        t2: PlateAmplitude,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ElementDecl {
    Plate {
        t1: PlateAmplitude,
        t2: PlateAmplitude,
    },
    Phase {
        path: u8,
        phi: f64,
    },
    BeamSplitter {
        t: f64,
        tau: f64,
        rho: f64,
        tau_p: f64,
        rho_p: f64,
    },
    Bloch {
        chi: f64,
        delta: f64,
    },
}

impl ElementDecl {
    /// Splitter with the default phase convention.
    pub fn splitter(t: f64) -> Self {
        ElementDecl::BeamSplitter {
            t,
            tau: BeamSplitterParams::DEFAULT_TAU,
            rho: BeamSplitterParams::DEFAULT_RHO,
            tau_p: BeamSplitterParams::DEFAULT_TAU_P,
            rho_p: BeamSplitterParams::DEFAULT_RHO_P,
        }
    }

    pub fn keyword(&self) -> &'static str {
        match self {
            ElementDecl::Plate { .. } => "ap",
            ElementDecl::Phase { .. } => "phase",
            ElementDecl::BeamSplitter { .. } => "bs",
            ElementDecl::Bloch { .. } => "bloch",
        }
    }

    pub fn is_basis_change(&self) -> bool {
        matches!(self, ElementDecl::BeamSplitter { .. } | ElementDecl::Bloch { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    W,
    Phi,
    Alpha,
}

impl SweepVariable {
    pub fn keyword(self) -> &'static str {
        match self {
            SweepVariable::W => "w",
            SweepVariable::Phi => "phi",
            SweepVariable::Alpha => "alpha",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        match s {
            "w" => Some(SweepVariable::W),
            "phi" => Some(SweepVariable::Phi),
            "alpha" => Some(SweepVariable::Alpha),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepDecl {
    pub variable: SweepVariable,
    pub points: usize,
}

impl SweepDecl {
    pub const DEFAULT_POINTS: usize = 361;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerDecl {
    pub n: u64,
    pub seed: u64,
}

/// A complete experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitConfig {
    pub system: System,
    pub source: SourceDecl,
    pub side_a: Vec<ElementDecl>,
    pub side_b: Vec<ElementDecl>,
    pub sweep: Option<SweepDecl>,
    pub sampler: Option<SamplerDecl>,
}

impl CircuitConfig {
    pub fn side(&self, side: Side) -> &[ElementDecl] {
        match side {
            Side::A => &self.side_a,
            Side::B => &self.side_b,
        }
    }

    /// Entangled photon pair with the same default-convention splitter on
    /// both sides.
    pub fn photon_entangled(p: f64, q: f64, alpha: f64, t: f64) -> Self {
        Self {
            system: System::Photon,
            source: SourceDecl::Entangled { p, q, alpha },
            side_a: vec![ElementDecl::splitter(t)],
            side_b: vec![ElementDecl::splitter(t)],
            sweep: None,
            sampler: None,
        }
    }
}
