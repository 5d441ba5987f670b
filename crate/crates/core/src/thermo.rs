//! Classical thermodynamic entropy of ideal gases.
//!
//! Units: `k = 1`, `m = 1`; temperature is in energy units and entropy is
//! reported in units of `k`. Pressure is never stored — it is always derived
//! from `P V = N T`, so the ideal-gas law holds identically.

use std::collections::HashMap;

use thiserror::Error;

use crate::scalar::Real;

/// Relative tolerance for the equal-pressure / equal-temperature
/// preconditions of the mixing scenarios.
pub(crate) const STATE_MATCH_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum ThermoError {
    #[error("volume must be positive and finite")]
    InvalidVolume,
    #[error("temperature must be positive and finite")]
    InvalidTemperature,
    #[error("mixing requires equal temperatures on both sides")]
    TemperatureMismatch,
    #[error("mixing requires equal pressures on both sides")]
    PressureMismatch,
    #[error("path endpoints must match the start and end states")]
    PathEndpointMismatch,
    #[error("path must stay in the P > 0, T > 0 quadrant")]
    PathOutOfQuadrant,
    #[error("a path needs at least one segment and one quadrature step")]
    DegeneratePath,
    #[error("start and end must share species and particle count")]
    IncompatibleStates,
}

/// An opaque species tag.
///
/// Equality (and therefore every computation in this crate) looks at the
/// name only. `similarity` is inert metadata — a label distance that exists
/// so tests can demonstrate that making two gases "more similar" changes no
/// entropy by even one bit.
#[derive(Debug, Clone)]
pub struct Species {
    pub name: String,
    pub similarity: f64,
}

impl Species {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            similarity: 0.0,
        }
    }

    pub fn with_similarity(name: impl Into<String>, similarity: f64) -> Self {
        Self {
            name: name.into(),
            similarity,
        }
    }
}

impl PartialEq for Species {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
    }
}

impl Eq for Species {}

/// A compartment's contents: species, particle count `N`, volume `V`,
/// temperature `T`. Pressure is the derived `N T / V`.
#[derive(Debug, Clone, PartialEq)]
pub struct GasSpecimen<T> {
    pub species: Species,
    pub particles: u64,
    pub volume: T,
    pub temperature: T,
}

impl<T: Real> GasSpecimen<T> {
    pub fn new(
        species: Species,
        particles: u64,
        volume: T,
        temperature: T,
    ) -> Result<Self, ThermoError> {
        if !volume.is_finite() || volume <= T::zero() {
            return Err(ThermoError::InvalidVolume);
        }
        if !temperature.is_finite() || temperature <= T::zero() {
            return Err(ThermoError::InvalidTemperature);
        }
        Ok(Self {
            species,
            particles,
            volume,
            temperature,
        })
    }

    /// Ideal-gas pressure `N T / V`.
    pub fn pressure(&self) -> T {
        T::of_u64(self.particles) * self.temperature / self.volume
    }
}

/// The per-particle entropy constant `c`, keyed per species.
///
/// Entropy differences at fixed species and fixed `N` are independent of
/// the chosen constants; no physical default is implied beyond 0.
#[derive(Debug, Clone, Default)]
pub struct EntropyConvention<T> {
    constants: HashMap<String, T>,
}

impl<T: Real> EntropyConvention<T> {
    pub fn new() -> Self {
        Self {
            constants: HashMap::new(),
        }
    }

    pub fn with_constant(mut self, species: &Species, c: T) -> Self {
        self.constants.insert(species.name.clone(), c);
        self
    }

    pub fn constant_for(&self, species: &Species) -> T {
        self.constants
            .get(&species.name)
            .copied()
            .unwrap_or_else(T::zero)
    }
}

pub(crate) fn nearly_equal<T: Real>(a: T, b: T) -> bool {
    let tol = T::of_f64(STATE_MATCH_TOLERANCE);
    let scale = a.abs().max(b.abs()).max(T::one());
    (a - b).abs() <= tol * scale
}

/// `S(P, T, N) = (5/2) N ln T - N ln P + c N`, with `P = N T / V`.
///
/// An empty specimen has zero entropy; that is what keeps juxtaposition
/// additive.
pub fn ideal_gas_entropy<T: Real>(gas: &GasSpecimen<T>, convention: &EntropyConvention<T>) -> T {
    if gas.particles == 0 {
        return T::zero();
    }
    let n = T::of_u64(gas.particles);
    let c = convention.constant_for(&gas.species);
    let five_halves = T::of_f64(2.5);
    five_halves * n * gas.temperature.ln() - n * gas.pressure().ln() + c * n
}

/// One waypoint of a reversible path in the `(P, T)` plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathPoint<T> {
    pub pressure: T,
    pub temperature: T,
}

impl<T: Real> PathPoint<T> {
    pub fn of_state(gas: &GasSpecimen<T>) -> Self {
        Self {
            pressure: gas.pressure(),
            temperature: gas.temperature,
        }
    }
}

/// Quadrature of `dQ/T = (5/2) N d(ln T) - N d(ln P)` along a reversible
/// path, by the midpoint rule with log-linear interpolation between
/// waypoints. Converges to the closed-form entropy difference as
/// `steps -> infinity`, independent of the waypoints in between.
pub fn entropy_difference_by_path<T: Real>(
    start: &GasSpecimen<T>,
    end: &GasSpecimen<T>,
    waypoints: &[PathPoint<T>],
    steps: u32,
) -> Result<T, ThermoError> {
    if start.species != end.species || start.particles != end.particles {
        return Err(ThermoError::IncompatibleStates);
    }
    if waypoints.is_empty() || steps == 0 {
        return Err(ThermoError::DegeneratePath);
    }
    for point in waypoints {
        if point.pressure <= T::zero() || point.temperature <= T::zero() {
            return Err(ThermoError::PathOutOfQuadrant);
        }
    }
    let first = &waypoints[0];
    let last = &waypoints[waypoints.len() - 1];
    if !nearly_equal(first.pressure, start.pressure())
        || !nearly_equal(first.temperature, start.temperature)
        || !nearly_equal(last.pressure, end.pressure())
        || !nearly_equal(last.temperature, end.temperature)
    {
        return Err(ThermoError::PathEndpointMismatch);
    }

    let n = T::of_u64(start.particles);
    let five_halves = T::of_f64(2.5);
    let step_count = T::of_u64(steps as u64);
    let h = T::one() / step_count;
    let half = T::of_f64(0.5);

    let mut total = T::zero();
    for segment in waypoints.windows(2) {
        let ln_t_a = segment[0].temperature.ln();
        let ln_t_b = segment[1].temperature.ln();
        let ln_p_a = segment[0].pressure.ln();
        let ln_p_b = segment[1].pressure.ln();
        let d_ln_t = ln_t_b - ln_t_a;
        let d_ln_p = ln_p_b - ln_p_a;
        for i in 0..steps {
            let s_lo = T::of_u64(i as u64) * h;
            let s_hi = s_lo + h;
            let s_mid = s_lo + half * h;
            // midpoint evaluation of dT/T and dP/P on the log-linear segment
            let t_mid = (ln_t_a + s_mid * d_ln_t).exp();
            let p_mid = (ln_p_a + s_mid * d_ln_p).exp();
            let dt = (ln_t_a + s_hi * d_ln_t).exp() - (ln_t_a + s_lo * d_ln_t).exp();
            let dp = (ln_p_a + s_hi * d_ln_p).exp() - (ln_p_a + s_lo * d_ln_p).exp();
            total += n * (five_halves * dt / t_mid - dp / p_mid);
        }
    }
    Ok(total)
}

/// Entropy of mixing two specimens at equal `P` and `T`.
///
/// With a discrimination technique granted (semi-permeable membranes), the
/// result is `N_l ln(V/V_l) + N_r ln(V/V_r)` — `2 N ln 2` in the symmetric
/// case — no matter how similar the gases are. Without one it is exactly 0.
/// There is nothing in between.
pub fn thermo_mixing_entropy<T: Real>(
    left: &GasSpecimen<T>,
    right: &GasSpecimen<T>,
    discriminable: bool,
) -> Result<T, ThermoError> {
    check_common_equilibrium(left, right)?;
    if !discriminable {
        return Ok(T::zero());
    }
    let total_volume = left.volume + right.volume;
    let n_left = T::of_u64(left.particles);
    let n_right = T::of_u64(right.particles);
    Ok(n_left * (total_volume / left.volume).ln() + n_right * (total_volume / right.volume).ln())
}

pub(crate) fn check_common_equilibrium<T: Real>(
    left: &GasSpecimen<T>,
    right: &GasSpecimen<T>,
) -> Result<(), ThermoError> {
    if !nearly_equal(left.temperature, right.temperature) {
        return Err(ThermoError::TemperatureMismatch);
    }
    if !nearly_equal(left.pressure(), right.pressure()) {
        return Err(ThermoError::PressureMismatch);
    }
    Ok(())
}

/// Reversible isothermal work `N T ln(V_to / V_from)` delivered by a gas
/// confined behind a selective membrane swept between the two volumes.
/// Positive for expansion, negative for compression.
pub fn isothermal_membrane_work<T: Real>(
    particles: u64,
    temperature: T,
    v_from: T,
    v_to: T,
) -> Result<T, ThermoError> {
    if v_from <= T::zero() || v_to <= T::zero() {
        return Err(ThermoError::InvalidVolume);
    }
    if temperature <= T::zero() {
        return Err(ThermoError::InvalidTemperature);
    }
    Ok(T::of_u64(particles) * temperature * (v_to / v_from).ln())
}
