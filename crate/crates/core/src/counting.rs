//! Microstate counting under the four conventions.
//!
//! For `N` particles with `X` one-particle states available, the count `W`
//! of many-particle states is
//!
//! * `X^N` when every particle is tracked individually (distinguishable),
//! * `X^N / N!` under the corrected-Boltzmann convention,
//! * `C(N + X - 1, N)` for bosons,
//! * `C(X, N)` for fermions (only feasible for `N <= X`).
//!
//! Both quantum counts collapse to `X^N / N!` in the dilute limit
//! `X >> N`, and for fixed `N` each differs from classical counting by a
//! constant factor only — which is why none of this moves any entropy
//! difference.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::logcomb::{ln_binomial, ln_factorial, LogQuantity};
use crate::scalar::Real;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CountingError {
    #[error("at least one one-particle state is required")]
    NoStates,
    #[error("{particles} fermions do not fit into {states} states")]
    FermiOverfilled { particles: u64, states: u64 },
    #[error("the dilute-limit deviation is defined for Bose or Fermi counting")]
    DiluteNeedsQuantumStatistics,
    #[error("the dilute-limit deviation needs at least one particle")]
    DiluteNeedsParticles,
    #[error("unknown counting convention `{0}`")]
    UnknownConvention(String),
}

/// The rule assigning a microstate count to a macrostate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CountingConvention {
    Distinguishable,
    CorrectedBoltzmann,
    Bose,
    Fermi,
}

impl fmt::Display for CountingConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Self::Distinguishable => "distinguishable",
            Self::CorrectedBoltzmann => "corrected-boltzmann",
            Self::Bose => "bose",
            Self::Fermi => "fermi",
        };
        f.write_str(name)
    }
}

impl FromStr for CountingConvention {
    type Err = CountingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "distinguishable" | "classical" => Ok(Self::Distinguishable),
            "corrected-boltzmann" | "corrected" => Ok(Self::CorrectedBoltzmann),
            "bose" | "bose-einstein" => Ok(Self::Bose),
            "fermi" | "fermi-dirac" => Ok(Self::Fermi),
            other => Err(CountingError::UnknownConvention(other.to_string())),
        }
    }
}

/// `N` particles with `X` one-particle states available to them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateSpaceSpec {
    pub particles: u64,
    pub states: u64,
}

impl StateSpaceSpec {
    pub fn new(particles: u64, states: u64) -> Result<Self, CountingError> {
        if states == 0 {
            return Err(CountingError::NoStates);
        }
        Ok(Self { particles, states })
    }
}

/// `ln W` under the given convention.
pub fn ln_microstate_count<T: Real>(
    spec: StateSpaceSpec,
    convention: CountingConvention,
) -> Result<LogQuantity<T>, CountingError> {
    if spec.states == 0 {
        return Err(CountingError::NoStates);
    }
    let n = spec.particles;
    let x = spec.states;
    let n_real = T::of_u64(n);
    let ln_x = T::of_u64(x).ln();
    let ln_w = match convention {
        CountingConvention::Distinguishable => n_real * ln_x,
        CountingConvention::CorrectedBoltzmann => n_real * ln_x - ln_factorial::<T>(n),
        CountingConvention::Bose => {
            ln_binomial::<T>(n + x - 1, n).expect("n <= n + x - 1 by construction")
        }
        CountingConvention::Fermi => {
            ln_binomial::<T>(x, n).map_err(|_| CountingError::FermiOverfilled {
                particles: n,
                states: x,
            })?
        }
    };
    Ok(LogQuantity::from_ln(ln_w))
}

/// `ln W_quantum - ln(X^N / N!)`: how far Bose or Fermi counting sits from
/// the corrected-Boltzmann count. Tends to 0 as `X/N -> infinity`; exactly 0
/// for a single particle, where all conventions give `X` states.
pub fn dilute_limit_deviation<T: Real>(
    spec: StateSpaceSpec,
    convention: CountingConvention,
) -> Result<T, CountingError> {
    if !matches!(
        convention,
        CountingConvention::Bose | CountingConvention::Fermi
    ) {
        return Err(CountingError::DiluteNeedsQuantumStatistics);
    }
    if spec.particles == 0 {
        return Err(CountingError::DiluteNeedsParticles);
    }
    if spec.particles == 1 {
        return Ok(T::zero());
    }
    let quantum = ln_microstate_count::<T>(spec, convention)?;
    let reference = ln_microstate_count::<T>(spec, CountingConvention::CorrectedBoltzmann)?;
    Ok(quantum.ln() - reference.ln())
}

/// The count after a partition between two equal single-compartment systems
/// (each with count `W`) is removed: `W^2 * C(2N, N)` — the binomial is the
/// number of ways the `2N` individually tracked particles can end up
/// distributed over the two half volumes.
pub fn combined_count_after_removal<T: Real>(
    single_compartment: LogQuantity<T>,
    particles_per_side: u64,
) -> LogQuantity<T> {
    let two = T::of_f64(2.0);
    let redistribution =
        ln_binomial::<T>(2 * particles_per_side, particles_per_side).expect("N <= 2N always holds");
    LogQuantity::from_ln(two * single_compartment.ln() + redistribution)
}

/// `S = ln W` in units of `k`.
pub fn entropy_from_count<T: Real>(count: LogQuantity<T>) -> T {
    count.ln()
}

/// `S_2 - S_1 = ln(W_2 / W_1)` — the form in which entropy carries
/// empirical content.
pub fn entropy_difference<T: Real>(after: LogQuantity<T>, before: LogQuantity<T>) -> T {
    after.ln() - before.ln()
}
