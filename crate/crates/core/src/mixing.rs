//! The partition-removal scenario engine.
//!
//! Removing the partition between two compartments at equal pressure and
//! temperature changes the microstate count in two ways: every tracked
//! population gains access to the combined volume, and — if the
//! experimenter's discrimination policy can tell populations apart — the
//! redistribution of individually tracked particles over the two half
//! volumes contributes a binomial multiplicity. The policy, not the
//! counting convention, decides whether a mixing entropy appears:
//!
//! * `ByOrigin` keeps full trajectory-level bookkeeping. Before removal
//!   every particle sits on its origin side (multiplicity 1); afterwards
//!   any assignment consistent with the per-species equilibrium occupancies
//!   is a distinct accessible microstate.
//! * `BySpecies` tracks chemical kind only. Different gases mix with the
//!   full binomial multiplicity per species; for a single kind the
//!   before and after descriptions coincide and nothing changes.
//! * `None` refuses all discrimination, so removal never changes the
//!   description and the entropy change is exactly zero.
//!
//! Counting conventions enter as one global factor on the total count —
//! `1/N_total!`, or the Bose/Fermi total-state constants — and
//! [`inertness_under`] computes both corrected entropies explicitly to show
//! the factor drop out of every difference.
//!
//! The open-system route (`et_*`) derives the same numbers from the
//! binomial distribution of a fluctuating particle number. Note that the
//! free-expansion entropy is implemented as the log-ratio of the
//! equilibrium and initial occupancy probabilities, which gives
//! `ln C(N, N/2) ~ N ln 2` for equal volumes; reading the printed
//! probability itself (with its `2^-N` normalization) inside the log would
//! instead give a small negative number, so reports surface both the exact
//! log-binomial and its Stirling leading order.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::counting::{ln_microstate_count, CountingConvention, CountingError, StateSpaceSpec};
use crate::logcomb::{ln_binomial, ln_factorial};
use crate::scalar::Real;
use crate::stats::compensated_sum;
use crate::thermo::{check_common_equilibrium, GasSpecimen, ThermoError};

#[derive(Debug, Error, PartialEq)]
pub enum MixingError {
    #[error(transparent)]
    Thermo(#[from] ThermoError),
    #[error(transparent)]
    Counting(#[from] CountingError),
    #[error("states-per-volume must be positive and finite")]
    InvalidStatesPerVolume,
    #[error("occupancy {occupancy} exceeds the particle total {total}")]
    OccupancyOutOfRange { occupancy: u64, total: u64 },
    #[error("volumes must be positive and finite")]
    InvalidVolume,
    #[error("density must be positive and finite")]
    InvalidDensity,
    #[error("symmetric expansion requires an even particle count")]
    OddSymmetricSplit,
    #[error("unknown discrimination policy `{0}`")]
    UnknownPolicy(String),
}

/// The experimenter's chosen criterion for telling particles apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiscriminationPolicy {
    /// Distinguish particles by species tag only.
    BySpecies,
    /// Additionally distinguish left-origin from right-origin particles —
    /// the demon's capability.
    ByOrigin,
    /// Treat all particles as interchangeable for the bookkeeping.
    None,
}

impl fmt::Display for DiscriminationPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Self::BySpecies => "by-species",
            Self::ByOrigin => "by-origin",
            Self::None => "none",
        };
        f.write_str(name)
    }
}

impl FromStr for DiscriminationPolicy {
    type Err = MixingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "by-species" | "species" => Ok(Self::BySpecies),
            "by-origin" | "origin" => Ok(Self::ByOrigin),
            "none" => Ok(Self::None),
            other => Err(MixingError::UnknownPolicy(other.to_string())),
        }
    }
}

/// Which constant factor is applied to the total count of both the
/// before and the after state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GlobalCorrection {
    /// Divide every count by `N_total!`.
    TotalFactorial,
    /// Replace the classical total count by the Bose count for all
    /// `N_total` particles in the combined state space.
    BoseTotalCount,
    /// Same with the Fermi count.
    FermiTotalCount,
}

/// Two compartments, a discrimination policy and a counting convention.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingScenario<T> {
    pub left: GasSpecimen<T>,
    pub right: GasSpecimen<T>,
    pub policy: DiscriminationPolicy,
    pub convention: CountingConvention,
    /// One-particle states per unit volume; the state count of a region is
    /// proportional to its volume at fixed temperature.
    pub states_per_volume: T,
}

impl<T: Real> MixingScenario<T> {
    pub fn new(
        left: GasSpecimen<T>,
        right: GasSpecimen<T>,
        policy: DiscriminationPolicy,
        convention: CountingConvention,
        states_per_volume: T,
    ) -> Result<Self, MixingError> {
        check_common_equilibrium(&left, &right)?;
        if !states_per_volume.is_finite() || states_per_volume <= T::zero() {
            return Err(MixingError::InvalidStatesPerVolume);
        }
        Ok(Self {
            left,
            right,
            policy,
            convention,
            states_per_volume,
        })
    }

    pub fn total_particles(&self) -> u64 {
        self.left.particles + self.right.particles
    }

    pub fn same_species(&self) -> bool {
        self.left.species == self.right.species
    }

    /// Integer state count of the combined volume, used by the global
    /// quantum-counting constants.
    pub fn combined_states(&self) -> u64 {
        let x = self.states_per_volume * (self.left.volume + self.right.volume);
        let rounded = x.round();
        if rounded < T::one() {
            1
        } else {
            rounded.to_u64().unwrap_or(u64::MAX)
        }
    }
}

/// Most probable occupancy of the first volume when `n` particles roam
/// `v1 + v2`; ties from a non-integer peak are broken toward the larger
/// probability.
fn equilibrium_occupancy<T: Real>(n: u64, v1: T, v2: T) -> u64 {
    if n == 0 {
        return 0;
    }
    let p = v1 / (v1 + v2);
    let guess = (T::of_u64(n + 1) * p).floor().to_u64().unwrap_or(0).min(n);
    let ln_weight = |k: u64| -> T {
        ln_binomial::<T>(n, k).expect("k <= n by construction")
            + T::of_u64(k) * p.ln()
            + T::of_u64(n - k) * (T::one() - p).ln()
    };
    let mut best = guess;
    for candidate in [guess.saturating_sub(1), guess, (guess + 1).min(n)] {
        if ln_weight(candidate) > ln_weight(best) {
            best = candidate;
        }
    }
    best
}

/// Log-count terms of the before and after descriptions of a scenario.
/// Per-region positional factors use `X proportional to V`; the policy
/// contributes the redistribution binomials.
fn description_terms<T: Real>(s: &MixingScenario<T>) -> (Vec<T>, Vec<T>) {
    let n_left = s.left.particles;
    let n_right = s.right.particles;
    let n_total = n_left + n_right;
    let v_left = s.left.volume;
    let v_right = s.right.volume;
    let ln_x_left = (s.states_per_volume * v_left).ln();
    let ln_x_right = (s.states_per_volume * v_right).ln();

    let positional = |in_left: u64, in_right: u64| -> [T; 2] {
        [
            T::of_u64(in_left) * ln_x_left,
            T::of_u64(in_right) * ln_x_right,
        ]
    };
    let choose = |n: u64, k: u64| -> T { ln_binomial::<T>(n, k).expect("occupancy within total") };

    let species_resolved = !s.same_species()
        && matches!(
            s.policy,
            DiscriminationPolicy::BySpecies | DiscriminationPolicy::ByOrigin
        );

    let mut before = Vec::new();
    let mut after = Vec::new();
    if species_resolved {
        // each species equilibrates over the full volume independently
        let eq_left_of_l = equilibrium_occupancy(n_left, v_left, v_right);
        let eq_left_of_r = equilibrium_occupancy(n_right, v_left, v_right);
        before.extend(positional(n_left, 0));
        before.extend(positional(0, n_right));
        after.push(choose(n_left, eq_left_of_l));
        after.extend(positional(eq_left_of_l, n_left - eq_left_of_l));
        after.push(choose(n_right, eq_left_of_r));
        after.extend(positional(eq_left_of_r, n_right - eq_left_of_r));
    } else {
        let eq_left = equilibrium_occupancy(n_total, v_left, v_right);
        match s.policy {
            DiscriminationPolicy::ByOrigin => {
                // origin tags pin every particle before removal; afterwards
                // any of the C(N_total, eq) assignments is accessible
                after.push(choose(n_total, eq_left));
            }
            DiscriminationPolicy::BySpecies | DiscriminationPolicy::None => {
                // only occupancies are described on either side of the removal
                before.push(choose(n_total, n_left));
                after.push(choose(n_total, eq_left));
            }
        }
        before.extend(positional(n_left, n_right));
        after.extend(positional(eq_left, n_total - eq_left));
    }
    (before, after)
}

/// Natural log of the constant factor a convention attaches to the total
/// count of `n_total` particles in `x_total` combined states.
fn convention_constant<T: Real>(
    convention: CountingConvention,
    n_total: u64,
    x_total: u64,
) -> Result<T, MixingError> {
    let constant = match convention {
        CountingConvention::Distinguishable => T::zero(),
        CountingConvention::CorrectedBoltzmann => -ln_factorial::<T>(n_total),
        CountingConvention::Bose | CountingConvention::Fermi => {
            let spec = StateSpaceSpec::new(n_total, x_total)?;
            let quantum = ln_microstate_count::<T>(spec, convention)?;
            quantum.ln() - T::of_u64(n_total) * T::of_u64(x_total).ln()
        }
    };
    Ok(constant)
}

fn correction_constant<T: Real>(
    correction: GlobalCorrection,
    n_total: u64,
    x_total: u64,
) -> Result<T, MixingError> {
    match correction {
        GlobalCorrection::TotalFactorial => Ok(-ln_factorial::<T>(n_total)),
        GlobalCorrection::BoseTotalCount => {
            convention_constant(CountingConvention::Bose, n_total, x_total)
        }
        GlobalCorrection::FermiTotalCount => {
            convention_constant(CountingConvention::Fermi, n_total, x_total)
        }
    }
}

/// Exact entropy change of partition removal, in units of `k`.
///
/// The scenario's convention contributes the same constant to both states,
/// so it cancels in the difference; it is still applied, and a Fermi
/// convention still requires the combined state space to hold all
/// particles.
pub fn boltzmann_mixing_entropy<T: Real>(s: &MixingScenario<T>) -> Result<T, MixingError> {
    if s.total_particles() == 0 {
        return Ok(T::zero());
    }
    let constant =
        convention_constant::<T>(s.convention, s.total_particles(), s.combined_states())?;
    let (before, after) = description_terms(s);
    if before == after {
        // the policy sees no change in the description at equal P and T
        return Ok(T::zero());
    }
    let mut merged = after;
    merged.push(constant);
    merged.extend(before.into_iter().map(|t| -t));
    merged.push(-constant);
    Ok(compensated_sum(&merged))
}

/// Stirling leading order of [`boltzmann_mixing_entropy`], with real-valued
/// equilibrium occupancies and every binomial replaced by its entropy-
/// function limit `ln C(n, k) -> n H(k/n)`.
pub fn stirling_mixing_entropy<T: Real>(s: &MixingScenario<T>) -> Result<T, MixingError> {
    if s.total_particles() == 0 {
        return Ok(T::zero());
    }
    let v_left = s.left.volume;
    let v_right = s.right.volume;
    let total_volume = v_left + v_right;
    let p = v_left / total_volume;
    let entropy_fn = |p: T| -> T {
        if p <= T::zero() || p >= T::one() {
            T::zero()
        } else {
            let q = T::one() - p;
            -(p * p.ln() + q * q.ln())
        }
    };
    let ln_ratio_left = (total_volume / v_left).ln();
    let ln_ratio_right = (total_volume / v_right).ln();

    let species_resolved = !s.same_species()
        && matches!(
            s.policy,
            DiscriminationPolicy::BySpecies | DiscriminationPolicy::ByOrigin
        );
    let value = if species_resolved {
        // per-species free expansion: N_l ln(V/V_l) + N_r ln(V/V_r)
        T::of_u64(s.left.particles) * ln_ratio_left + T::of_u64(s.right.particles) * ln_ratio_right
    } else if matches!(s.policy, DiscriminationPolicy::ByOrigin) {
        T::of_u64(s.total_particles()) * entropy_fn(p)
    } else {
        T::zero()
    };
    Ok(value)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InertnessCheck<T> {
    pub without_correction: T,
    pub with_correction: T,
}

/// Computes the partition-removal entropy change twice: from the raw
/// counts, and from counts whose total is multiplied by the chosen global
/// constant in both the before and the after state. The pair is equal to
/// rounding because the constant shifts both entropy levels alike.
pub fn inertness_under<T: Real>(
    s: &MixingScenario<T>,
    correction: GlobalCorrection,
) -> Result<InertnessCheck<T>, MixingError> {
    if s.total_particles() == 0 {
        return Ok(InertnessCheck {
            without_correction: T::zero(),
            with_correction: T::zero(),
        });
    }
    let constant = correction_constant::<T>(correction, s.total_particles(), s.combined_states())?;
    let (before, after) = description_terms(s);

    let without = {
        let mut merged: Vec<T> = after.clone();
        merged.extend(before.iter().map(|&t| -t));
        compensated_sum(&merged)
    };
    // each corrected entropy level is actually formed, then differenced
    let mut corrected_after = after;
    corrected_after.push(constant);
    let mut corrected_before = before;
    corrected_before.push(constant);
    let with = compensated_sum(&corrected_after) - compensated_sum(&corrected_before);

    Ok(InertnessCheck {
        without_correction: without,
        with_correction: with,
    })
}

/// Division of all counts by `N_total!` — the factor motivated by particle
/// permutability — applied to both states. Returns the entropy change with
/// and without it; the claim made executable here is that the two are
/// always equal.
pub fn convention_shift_inertness<T: Real>(
    s: &MixingScenario<T>,
) -> Result<InertnessCheck<T>, MixingError> {
    inertness_under(s, GlobalCorrection::TotalFactorial)
}

/// Binomial probability of finding `occupancy` of `total` particles in the
/// first of two volumes.
pub fn et_probability<T: Real>(occupancy: u64, total: u64, v1: T, v2: T) -> Result<T, MixingError> {
    if occupancy > total {
        return Err(MixingError::OccupancyOutOfRange { occupancy, total });
    }
    if v1 <= T::zero() || v2 <= T::zero() {
        return Err(MixingError::InvalidVolume);
    }
    let volume = v1 + v2;
    let ln_p = ln_binomial::<T>(total, occupancy).expect("occupancy <= total")
        + T::of_u64(occupancy) * (v1 / volume).ln()
        + T::of_u64(total - occupancy) * (v2 / volume).ln();
    Ok(ln_p.exp())
}

/// Both integer candidates for the peak of the occupancy distribution,
/// with the larger-probability one flagged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OccupancyPeak<T> {
    pub floor_occupancy: u64,
    pub ceil_occupancy: u64,
    pub floor_probability: T,
    pub ceil_probability: T,
    pub most_probable: u64,
}

pub fn et_peak<T: Real>(total: u64, v1: T, v2: T) -> Result<OccupancyPeak<T>, MixingError> {
    if v1 <= T::zero() || v2 <= T::zero() {
        return Err(MixingError::InvalidVolume);
    }
    let mean = T::of_u64(total) * v1 / (v1 + v2);
    let floor_occupancy = mean.floor().to_u64().unwrap_or(0).min(total);
    let ceil_occupancy = mean.ceil().to_u64().unwrap_or(0).min(total);
    let floor_probability = et_probability(floor_occupancy, total, v1, v2)?;
    let ceil_probability = et_probability(ceil_occupancy, total, v1, v2)?;
    let most_probable = if ceil_probability > floor_probability {
        ceil_occupancy
    } else {
        floor_occupancy
    };
    Ok(OccupancyPeak {
        floor_occupancy,
        ceil_occupancy,
        floor_probability,
        ceil_probability,
        most_probable,
    })
}

/// Entropy change of a subsystem exchanging particles with an infinite
/// reservoir at number density `density`, when its occupancy moves from
/// `from` to `to`: the change of `ln[ (1/N_1!) (rho V_1)^{N_1} ]`. Only
/// differences are meaningful; the divergent normalization of the limit
/// construction cancels here.
pub fn et_reservoir_entropy_change<T: Real>(
    from: u64,
    to: u64,
    v1: T,
    density: T,
) -> Result<T, MixingError> {
    if v1 <= T::zero() {
        return Err(MixingError::InvalidVolume);
    }
    if !density.is_finite() || density <= T::zero() {
        return Err(MixingError::InvalidDensity);
    }
    let ln_mean = (density * v1).ln();
    let excess = T::of_u64(to) - T::of_u64(from);
    Ok(ln_factorial::<T>(from) - ln_factorial::<T>(to) + excess * ln_mean)
}

/// Free-expansion entropy: `N` particles initially confined to `v1` spread
/// over `v1 + v2`. Implemented as the log-ratio of the equilibrium and
/// all-in-`v1` occupancy probabilities, which reduces to
/// `ln C(N, N/2) = N ln 2 - (1/2) ln(pi N / 2) + O(1/N)` for equal volumes.
pub fn et_expansion_entropy<T: Real>(particles: u64, v1: T, v2: T) -> Result<T, MixingError> {
    if v1 <= T::zero() || v2 <= T::zero() {
        return Err(MixingError::InvalidVolume);
    }
    if particles == 0 {
        return Ok(T::zero());
    }
    if v1 == v2 && !particles.is_multiple_of(2) {
        return Err(MixingError::OddSymmetricSplit);
    }
    let equilibrium = if v1 == v2 {
        particles / 2
    } else {
        equilibrium_occupancy(particles, v1, v2)
    };
    // ln P(eq) - ln P(all in v1), with the shared volume factors cancelled
    // algebraically so the symmetric case is the bare log-binomial
    let binomial_part = ln_binomial::<T>(particles, equilibrium).expect("eq <= N")
        - ln_binomial::<T>(particles, particles).expect("N <= N");
    let volume_part = (T::of_u64(equilibrium) - T::of_u64(particles)) * (v1.ln() - v2.ln());
    Ok(binomial_part + volume_part)
}

/// Mixing entropy of two different gases in equal volumes by the
/// open-system route: each species free-expands independently, so the
/// total is `2 N ln 2` to leading order.
pub fn et_unequal_mixing_entropy<T: Real>(
    species_a: u64,
    species_b: u64,
) -> Result<T, MixingError> {
    let one = T::one();
    Ok(et_expansion_entropy(species_a, one, one)? + et_expansion_entropy(species_b, one, one)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermo::{thermo_mixing_entropy, Species};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const LN_2: f64 = std::f64::consts::LN_2;
    const PI: f64 = std::f64::consts::PI;

    fn gas(name: &str, n: u64, v: f64) -> GasSpecimen<f64> {
        GasSpecimen::new(Species::new(name), n, v, 1.0).unwrap()
    }

    fn scenario(
        left: GasSpecimen<f64>,
        right: GasSpecimen<f64>,
        policy: DiscriminationPolicy,
    ) -> MixingScenario<f64> {
        MixingScenario::new(
            left,
            right,
            policy,
            CountingConvention::Distinguishable,
            1000.0,
        )
        .unwrap()
    }

    fn symmetric_same_species(n: u64, policy: DiscriminationPolicy) -> MixingScenario<f64> {
        scenario(gas("argon", n, 1.0), gas("argon", n, 1.0), policy)
    }

    fn symmetric_different_species(n: u64, policy: DiscriminationPolicy) -> MixingScenario<f64> {
        scenario(gas("argon", n, 1.0), gas("neon", n, 1.0), policy)
    }

    #[test]
    fn scenario_requires_common_equilibrium() {
        let err = MixingScenario::new(
            gas("argon", 100, 1.0),
            gas("argon", 300, 1.0),
            DiscriminationPolicy::None,
            CountingConvention::Distinguishable,
            1000.0,
        );
        assert_eq!(err, Err(MixingError::Thermo(ThermoError::PressureMismatch)));
    }

    #[test]
    fn same_species_without_origin_tracking_gains_nothing() {
        for policy in [DiscriminationPolicy::None, DiscriminationPolicy::BySpecies] {
            let s = symmetric_same_species(10_000, policy);
            assert_eq!(boltzmann_mixing_entropy(&s).unwrap(), 0.0);
            assert_eq!(stirling_mixing_entropy(&s).unwrap(), 0.0);
        }
    }

    #[test]
    fn origin_tracking_recovers_the_exact_binomial() {
        let n = 10_000u64;
        let s = symmetric_same_species(n, DiscriminationPolicy::ByOrigin);
        let exact = boltzmann_mixing_entropy(&s).unwrap();
        assert_relative_eq!(
            exact,
            ln_binomial::<f64>(2 * n, n).unwrap(),
            max_relative = 1e-12
        );
        // 2N ln 2 - (1/2) ln(pi N) + O(1/N)
        assert_relative_eq!(
            exact,
            2.0 * n as f64 * LN_2 - 0.5 * (PI * n as f64).ln(),
            epsilon = 1e-3
        );
        assert_relative_eq!(
            stirling_mixing_entropy(&s).unwrap(),
            2.0 * n as f64 * LN_2,
            max_relative = 1e-12
        );
    }

    #[test]
    fn different_species_mix_with_the_per_species_binomials() {
        let n = 10_000u64;
        let s = symmetric_different_species(n, DiscriminationPolicy::BySpecies);
        let exact = boltzmann_mixing_entropy(&s).unwrap();
        assert_relative_eq!(
            exact,
            2.0 * ln_binomial::<f64>(n, n / 2).unwrap(),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            stirling_mixing_entropy(&s).unwrap(),
            2.0 * n as f64 * LN_2,
            max_relative = 1e-12
        );
        // refusing every discrimination hides the mixing even here
        let blind = symmetric_different_species(n, DiscriminationPolicy::None);
        assert_eq!(boltzmann_mixing_entropy(&blind).unwrap(), 0.0);
    }

    #[test]
    fn mixing_entropy_is_invariant_under_every_convention() {
        let n = 400u64;
        let reference =
            boltzmann_mixing_entropy(&symmetric_same_species(n, DiscriminationPolicy::ByOrigin))
                .unwrap();
        for convention in [
            CountingConvention::CorrectedBoltzmann,
            CountingConvention::Bose,
            CountingConvention::Fermi,
        ] {
            let s = MixingScenario::new(
                gas("argon", n, 1.0),
                gas("argon", n, 1.0),
                DiscriminationPolicy::ByOrigin,
                convention,
                1000.0,
            )
            .unwrap();
            let value = boltzmann_mixing_entropy(&s).unwrap();
            assert_relative_eq!(value, reference, epsilon = 1e-10);
        }
    }

    #[test]
    fn policy_jumps_with_no_intermediate_value_and_ignores_similarity() {
        let n = 10_000u64;
        let mut seen = Vec::new();
        for step in 0..10 {
            let similarity = step as f64 / 9.0;
            let left = GasSpecimen::new(Species::new("argon"), n, 1.0, 1.0).unwrap();
            let right =
                GasSpecimen::new(Species::with_similarity("argon", similarity), n, 1.0, 1.0)
                    .unwrap();
            let tracked = MixingScenario::new(
                left.clone(),
                right.clone(),
                DiscriminationPolicy::ByOrigin,
                CountingConvention::Distinguishable,
                1000.0,
            )
            .unwrap();
            let blind = MixingScenario::new(
                left,
                right,
                DiscriminationPolicy::None,
                CountingConvention::Distinguishable,
                1000.0,
            )
            .unwrap();
            seen.push((
                boltzmann_mixing_entropy(&tracked).unwrap(),
                boltzmann_mixing_entropy(&blind).unwrap(),
            ));
        }
        let (first_tracked, first_blind) = seen[0];
        assert_eq!(first_blind, 0.0);
        assert!(first_tracked > 2.0 * n as f64 * LN_2 - (n as f64).ln());
        for &(tracked, blind) in &seen {
            assert_eq!(tracked.to_bits(), first_tracked.to_bits());
            assert_eq!(blind.to_bits(), first_blind.to_bits());
        }
    }

    #[test]
    fn inertness_of_the_total_factorial_division() {
        // scales kept desk-size so the 1e-12 comparison is meaningful
        // against the entropy levels being subtracted
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let n = rng.random_range(1..=100u64);
            let m = rng.random_range(1..=100u64);
            let volume = rng.random_range(0.5..2.0f64);
            let same = rng.random_range(0..2) == 0;
            let policy = match rng.random_range(0..3) {
                0 => DiscriminationPolicy::None,
                1 => DiscriminationPolicy::BySpecies,
                _ => DiscriminationPolicy::ByOrigin,
            };
            // equal pressures need equal densities
            let left = gas("argon", n, volume * n as f64);
            let right = gas(if same { "argon" } else { "neon" }, m, volume * m as f64);
            let s = MixingScenario::new(
                left,
                right,
                policy,
                CountingConvention::Distinguishable,
                100.0,
            )
            .unwrap();
            let check = convention_shift_inertness(&s).unwrap();
            assert!(
                (check.without_correction - check.with_correction).abs() <= 1e-12,
                "inertness violated: {:?}",
                check
            );
        }
    }

    #[test]
    fn inertness_extends_to_quantum_total_count_constants() {
        let s = symmetric_same_species(300, DiscriminationPolicy::ByOrigin);
        let expected = ln_binomial::<f64>(600, 300).unwrap();
        for correction in [
            GlobalCorrection::TotalFactorial,
            GlobalCorrection::BoseTotalCount,
            GlobalCorrection::FermiTotalCount,
        ] {
            let check = inertness_under(&s, correction).unwrap();
            assert!((check.without_correction - check.with_correction).abs() <= 1e-12);
            assert_relative_eq!(check.without_correction, expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn inertness_on_the_different_species_scenario() {
        let n = 200u64;
        let s = symmetric_different_species(n, DiscriminationPolicy::BySpecies);
        let check = convention_shift_inertness(&s).unwrap();
        assert!((check.without_correction - check.with_correction).abs() <= 1e-12);
        assert_relative_eq!(
            check.without_correction,
            2.0 * ln_binomial::<f64>(n, n / 2).unwrap(),
            max_relative = 1e-12
        );
        // leading order 2 N ln 2
        assert_relative_eq!(
            check.without_correction,
            2.0 * n as f64 * LN_2,
            epsilon = 7.0
        );
    }

    #[test]
    fn inertness_degenerate_empty_scenario() {
        let s = symmetric_same_species(0, DiscriminationPolicy::ByOrigin);
        let check = convention_shift_inertness(&s).unwrap();
        assert_eq!(check.without_correction, 0.0);
        assert_eq!(check.with_correction, 0.0);
    }

    #[test]
    fn et_probability_is_the_fair_coin_for_two_particles() {
        assert_relative_eq!(et_probability(0, 2, 1.0, 1.0).unwrap(), 0.25);
        assert_relative_eq!(et_probability(1, 2, 1.0, 1.0).unwrap(), 0.5);
        assert_relative_eq!(et_probability(2, 2, 1.0, 1.0).unwrap(), 0.25);
        assert_eq!(
            et_probability(3, 2, 1.0, 1.0),
            Err(MixingError::OccupancyOutOfRange {
                occupancy: 3,
                total: 2
            })
        );
    }

    #[test]
    fn et_probability_normalizes_and_matches_moments() {
        let n = 1000u64;
        let (v1, v2) = (0.3f64, 0.7f64);
        let probabilities: Vec<f64> = (0..=n)
            .map(|k| et_probability(k, n, v1, v2).unwrap())
            .collect();
        let total = compensated_sum(&probabilities);
        assert!((total - 1.0).abs() <= 1e-12, "normalization {total}");
        let mean: f64 = probabilities
            .iter()
            .enumerate()
            .map(|(k, p)| k as f64 * p)
            .sum();
        let variance: f64 = probabilities
            .iter()
            .enumerate()
            .map(|(k, p)| (k as f64 - mean).powi(2) * p)
            .sum();
        let p1 = v1 / (v1 + v2);
        assert_relative_eq!(mean, n as f64 * p1, max_relative = 1e-9);
        assert_relative_eq!(variance, n as f64 * p1 * (1.0 - p1), max_relative = 1e-9);
    }

    #[test]
    fn et_peak_sits_at_the_scaled_volume_fraction() {
        let peak = et_peak(10_000u64, 1.0f64, 3.0).unwrap();
        assert_eq!(peak.floor_occupancy, 2500);
        assert_eq!(peak.most_probable, 2500);
        // non-integer peak: both candidates reported
        let peak = et_peak(10u64, 1.0f64, 2.0).unwrap();
        assert_eq!((peak.floor_occupancy, peak.ceil_occupancy), (3, 4));
        assert!(peak.floor_probability > 0.0 && peak.ceil_probability > 0.0);
    }

    #[test]
    fn reservoir_entropy_change_examples() {
        assert_eq!(et_reservoir_entropy_change(40, 40, 2.0, 10.0).unwrap(), 0.0);

        // discrete argmax of -ln k! + k ln(rho V1) sits at floor(rho V1)
        let density = 7.0f64;
        let v1 = 3.1f64;
        let mean = density * v1; // 21.7
        let term = |k: u64| et_reservoir_entropy_change(0, k, v1, density).unwrap();
        let argmax = (0..60u64)
            .max_by(|&a, &b| term(a).partial_cmp(&term(b)).unwrap())
            .unwrap();
        assert_eq!(argmax, mean.floor() as u64);

        // quadratic falloff around the mean: -m^2 / (2 rho V1)
        let density = 100.0f64;
        let v1 = 100.0f64; // rho V1 = 10^4
        let m = 100u64;
        let drop = et_reservoir_entropy_change(10_000, 10_000 + m, v1, density).unwrap();
        let quadratic = -(m as f64).powi(2) / (2.0 * 10_000.0);
        assert_relative_eq!(drop, quadratic, max_relative = 0.02);
    }

    #[test]
    fn expansion_entropy_examples() {
        assert_relative_eq!(et_expansion_entropy(2u64, 1.0f64, 1.0).unwrap(), 2f64.ln());
        assert_eq!(et_expansion_entropy(0u64, 1.0f64, 1.0).unwrap(), 0.0);
        assert_eq!(
            et_expansion_entropy(3u64, 1.0f64, 1.0),
            Err(MixingError::OddSymmetricSplit)
        );

        let n = 10_000u64;
        let exact = et_expansion_entropy(n, 1.0f64, 1.0).unwrap();
        // bit-identical to the log-binomial: internal consistency
        assert_eq!(
            exact.to_bits(),
            ln_binomial::<f64>(n, n / 2).unwrap().to_bits()
        );
        let stirling_level = n as f64 * LN_2 - 0.5 * (PI * n as f64 / 2.0).ln();
        assert!((exact - stirling_level).abs() <= 1e-3);
    }

    #[test]
    fn expansion_entropy_leading_order_approaches_n_ln_2() {
        let mut previous_gap = f64::INFINITY;
        for n in [100u64, 10_000, 1_000_000] {
            let ratio = et_expansion_entropy(n, 1.0f64, 1.0).unwrap() / (n as f64 * LN_2);
            let gap = (1.0 - ratio).abs();
            assert!(gap < previous_gap, "ratio gap not shrinking at N = {n}");
            previous_gap = gap;
        }
        // remaining gap is the Stirling term (1/2) ln(pi N / 2) / (N ln 2)
        assert!(previous_gap < 2e-5);
    }

    #[test]
    fn unequal_mixing_matches_both_partners() {
        let n = 10_000u64;
        let et = et_unequal_mixing_entropy::<f64>(n, n).unwrap();
        assert_relative_eq!(
            et,
            2.0 * ln_binomial::<f64>(n, n / 2).unwrap(),
            max_relative = 1e-12
        );
        assert_eq!(et_unequal_mixing_entropy::<f64>(0, 0).unwrap(), 0.0);

        // thermodynamic route, counting route, open-system route: all equal
        // to O(ln N), i.e. to 0.1% relative at this size
        let left = gas("argon", n, 1.0);
        let right = gas("neon", n, 1.0);
        let thermo = thermo_mixing_entropy(&left, &right, true).unwrap();
        let counting = boltzmann_mixing_entropy(&symmetric_different_species(
            n,
            DiscriminationPolicy::BySpecies,
        ))
        .unwrap();
        assert_relative_eq!(et, thermo, max_relative = 1e-3);
        assert_relative_eq!(counting, thermo, max_relative = 1e-3);
        assert_relative_eq!(counting, et, max_relative = 1e-12);
    }

    #[test]
    fn policy_names_round_trip() {
        for policy in [
            DiscriminationPolicy::BySpecies,
            DiscriminationPolicy::ByOrigin,
            DiscriminationPolicy::None,
        ] {
            assert_eq!(
                policy.to_string().parse::<DiscriminationPolicy>().unwrap(),
                policy
            );
        }
        assert!("telepathy".parse::<DiscriminationPolicy>().is_err());
    }
}
