//! An executable laboratory for the entropy of mixing ideal gases.
//!
//! The crate computes mixing entropies three independent ways — classical
//! thermodynamics, log-domain microstate counting under four conventions,
//! and the open-system (binomial-distribution) route — and demonstrates by
//! direct Monte Carlo work measurement that a tag-reading demon can recover
//! the full mixing entropy `2 N ln 2` even for chemically identical gases.
//!
//! The analytic modules are generic over the scalar type via [`scalar::Real`]
//! (`f32` or `f64`); the concrete aliases below fix `f64`, which is what the
//! simulator and the quantum demonstrations use throughout.

pub mod counting;
pub mod demon;
pub mod logcomb;
pub mod mixing;
pub mod quantum;
pub mod scalar;
pub mod stats;
pub mod thermo;

pub use scalar::Real;

/// `f64` log-domain count or probability.
pub type LogQuantity = logcomb::LogQuantity<f64>;
/// `f64` compartment contents (species, particle count, volume, temperature).
pub type GasSpecimen = thermo::GasSpecimen<f64>;
/// `f64` per-species entropy reference constants.
pub type EntropyConvention = thermo::EntropyConvention<f64>;
/// `f64` two-compartment mixing scenario.
pub type MixingScenario = mixing::MixingScenario<f64>;
