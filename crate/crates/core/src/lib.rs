//! Simulation and verification of generalized two-particle coherence-transfer
//! experiments.
//!
//! Path-entangled photon pairs pass through absorptive plates, phase shifters
//! and (possibly asymmetric) beam splitters; spin-entangled fermion pairs are
//! measured in an arbitrary Bloch basis. Every joint and local detection
//! probability is available both from direct state-vector arithmetic
//! ([`biphoton`], [`bifermion`]) and from closed-form expressions in the
//! reduced parameters `(ε, η, w)` ([`closed_form`]).
//!
//! The crate also ships phase sweeps and visibility extraction
//! ([`analysis`]), a Monte Carlo click sampler with post-selection
//! ([`sampler`]) and a small text format for experiment descriptions
//! ([`dsl`]).

pub mod analysis;
pub mod bifermion;
pub mod biphoton;
pub mod circuit;
pub mod closed_form;
pub mod dsl;
mod error;
pub mod optics;
pub mod quantum;
pub mod sampler;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
