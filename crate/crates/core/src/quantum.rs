//! Small-Hilbert-space demonstrations of the quantum side of the story.
//!
//! Three executable points:
//!
//! 1. Brute-force state enumeration reproduces the Bose/Fermi closed-form
//!    counts (the oracle role — sizes capped at 6 particles, 8 modes).
//! 2. Symmetrization bookkeeping: applying the (anti-)symmetrization factor
//!    per compartment before removal but to the whole volume afterwards
//!    deletes exactly `ln C(2N, N)` from the entropy change, while the
//!    correct rule — one factor for the total state on both sides — leaves
//!    every entropy difference untouched.
//! 3. Two orthogonal one-particle states stay orthogonal under unitary
//!    evolution, so origin remains decidable in principle; and the reduced
//!    density matrix of the antisymmetrized pair is the same mixed state
//!    `(|phi><phi| + |psi><psi|)/2` for both labels, which is why labels
//!    are the wrong place to look for particles.
//!
//! Everything here is concrete `f64`/`Complex64`; tolerances are sized for
//! 10^4-step drift at that precision. Compartment localization is modeled
//! as support on a subset of modes; the infinite tails of real wave
//! functions are a physical caveat, not part of the model.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::logcomb::{ln_binomial, ln_factorial, LogQuantity};
use crate::mixing::InertnessCheck;
use crate::stats::{compensated_sum, standard_normal_pair};

/// Exhaustive enumeration caps; counts grow combinatorially past these.
pub const ENUMERATION_PARTICLE_LIMIT: u64 = 6;
pub const ENUMERATION_MODE_LIMIT: usize = 8;

const HERMITIAN_TOLERANCE: f64 = 1e-12;
const UNITARY_TOLERANCE: f64 = 1e-12;
const ORTHOGONALITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum QuantumError {
    #[error("enumeration is capped at {ENUMERATION_PARTICLE_LIMIT} particles and {ENUMERATION_MODE_LIMIT} modes")]
    EnumerationTooLarge,
    #[error("a mode basis needs at least one mode")]
    EmptyBasis,
    #[error("{particles} fermions do not fit into {modes} modes")]
    FermiOverfilled { particles: u64, modes: usize },
    #[error("state amplitudes have zero norm")]
    ZeroState,
    #[error("states live in different mode bases")]
    DimensionMismatch,
    #[error("input states are not orthogonal (|<phi|psi>| = {overlap:.3e})")]
    NonOrthogonal { overlap: f64 },
    #[error("operator is not unitary within {UNITARY_TOLERANCE:.0e}")]
    NonUnitary,
    #[error("unknown statistics `{0}`")]
    UnknownStatistics(String),
}

/// Which side of the partition a one-particle mode belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Compartment {
    Left,
    Right,
}

/// A finite one-particle basis with every mode assigned to a compartment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeBasis {
    compartments: Vec<Compartment>,
}

impl ModeBasis {
    pub fn new(compartments: Vec<Compartment>) -> Result<Self, QuantumError> {
        if compartments.is_empty() {
            return Err(QuantumError::EmptyBasis);
        }
        Ok(Self { compartments })
    }

    /// `x_left` modes localized left, then `x_right` localized right.
    pub fn split(x_left: usize, x_right: usize) -> Result<Self, QuantumError> {
        let mut compartments = vec![Compartment::Left; x_left];
        compartments.extend(std::iter::repeat_n(Compartment::Right, x_right));
        Self::new(compartments)
    }

    pub fn modes(&self) -> usize {
        self.compartments.len()
    }

    pub fn compartment_of(&self, mode: usize) -> Compartment {
        self.compartments[mode]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Statistics {
    Bose,
    Fermi,
    Distinguishable,
}

impl fmt::Display for Statistics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Self::Bose => "bose",
            Self::Fermi => "fermi",
            Self::Distinguishable => "distinguishable",
        };
        f.write_str(name)
    }
}

impl FromStr for Statistics {
    type Err = QuantumError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "bose" | "bose-einstein" => Ok(Self::Bose),
            "fermi" | "fermi-dirac" => Ok(Self::Fermi),
            "distinguishable" | "classical" => Ok(Self::Distinguishable),
            other => Err(QuantumError::UnknownStatistics(other.to_string())),
        }
    }
}

/// Exhaustively enumerates the many-particle states of `particles` in the
/// basis and returns the count: occupation vectors summing to `N` for
/// bosons, 0/1 occupations for fermions, labeled assignments for
/// distinguishable particles.
pub fn enumerate_states(
    particles: u64,
    basis: &ModeBasis,
    statistics: Statistics,
) -> Result<u64, QuantumError> {
    let modes = basis.modes();
    if particles > ENUMERATION_PARTICLE_LIMIT || modes > ENUMERATION_MODE_LIMIT {
        return Err(QuantumError::EnumerationTooLarge);
    }
    match statistics {
        Statistics::Distinguishable => {
            // every particle independently picks a mode
            Ok((modes as u64).pow(particles as u32).max(1))
        }
        Statistics::Bose => Ok(count_occupations(particles, modes, particles)),
        Statistics::Fermi => {
            if particles > modes as u64 {
                return Err(QuantumError::FermiOverfilled { particles, modes });
            }
            Ok(count_occupations(particles, modes, 1))
        }
    }
}

/// Walks all occupation vectors over `modes` slots summing to `total`,
/// with per-mode occupancy capped at `max_per_mode`.
fn count_occupations(total: u64, modes: usize, max_per_mode: u64) -> u64 {
    fn walk(remaining: u64, slots: usize, cap: u64) -> u64 {
        if slots == 0 {
            return u64::from(remaining == 0);
        }
        let mut found = 0;
        for occupancy in 0..=remaining.min(cap) {
            found += walk(remaining - occupancy, slots - 1, cap);
        }
        found
    }
    walk(total, modes, max_per_mode)
}

/// The four counts of the per-compartment-vs-total symmetrization
/// comparison, for `N_left`, `N_right` particles over `X_left`, `X_right`
/// one-particle states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetrizationBookkeeping {
    /// `X^N / N!` applied to each compartment separately.
    pub flawed_before: LogQuantity<f64>,
    /// `(2X)^{2N} / (2N)!` for the joined volume.
    pub flawed_after: LogQuantity<f64>,
    /// Classical counting with the single total-state factor `1/(2N)!`.
    pub correct_before: LogQuantity<f64>,
    pub correct_after: LogQuantity<f64>,
}

impl SymmetrizationBookkeeping {
    pub fn flawed_delta(&self) -> f64 {
        self.flawed_after.ln() - self.flawed_before.ln()
    }

    pub fn correct_delta(&self) -> f64 {
        self.correct_after.ln() - self.correct_before.ln()
    }
}

/// Compares the flawed bookkeeping (symmetrization factor applied per
/// compartment before removal, to the whole volume after) with the correct
/// one (a single factor for the total state on both sides). The correct
/// rule reproduces the uncorrected entropy change exactly; the flawed rule
/// deletes the mixing term `ln C(N_total, N_left)`.
pub fn symmetrization_bookkeeping(
    n_left: u64,
    n_right: u64,
    x_left: u64,
    x_right: u64,
) -> SymmetrizationBookkeeping {
    let n_total = n_left + n_right;
    let positional = |n: u64, x: u64| -> f64 {
        if n == 0 {
            0.0
        } else {
            n as f64 * (x as f64).ln()
        }
    };
    let before_positional = positional(n_left, x_left) + positional(n_right, x_right);
    let after_positional = positional(n_total, x_left + x_right);
    let flawed_before =
        before_positional - ln_factorial::<f64>(n_left) - ln_factorial::<f64>(n_right);
    let flawed_after = after_positional - ln_factorial::<f64>(n_total);
    let correct_before = before_positional - ln_factorial::<f64>(n_total);
    let correct_after = after_positional - ln_factorial::<f64>(n_total);
    SymmetrizationBookkeeping {
        flawed_before: LogQuantity::from_ln(flawed_before),
        flawed_after: LogQuantity::from_ln(flawed_after),
        correct_before: LogQuantity::from_ln(correct_before),
        correct_after: LogQuantity::from_ln(correct_after),
    }
}

/// The constant-factor demonstration for quantum counting: the
/// partition-removal entropy for `N` per side over `X` states per side,
/// computed with raw distinguishable counting and again with the Bose or
/// Fermi total-state count replacing the classical one in both states. The
/// replacement is one constant for fixed `2N`, so both entropy levels
/// shift alike.
pub fn count_constant_inertness(
    particles_per_side: u64,
    states_per_side: u64,
    statistics: Statistics,
) -> Result<InertnessCheck<f64>, QuantumError> {
    let n = particles_per_side;
    let x = states_per_side.max(1);
    let n_total = 2 * n;
    let x_total = 2 * x;
    if matches!(statistics, Statistics::Fermi) && n_total > x_total {
        return Err(QuantumError::FermiOverfilled {
            particles: n_total,
            modes: x_total as usize,
        });
    }
    if n == 0 {
        return Ok(InertnessCheck {
            without_correction: 0.0,
            with_correction: 0.0,
        });
    }
    let ln_x = (x as f64).ln();
    let redistribution = ln_binomial::<f64>(n_total, n).expect("n <= 2n");
    let before = [n as f64 * ln_x, n as f64 * ln_x];
    let after = [redistribution, n as f64 * ln_x, n as f64 * ln_x];

    let constant = match statistics {
        Statistics::Distinguishable => 0.0,
        Statistics::Bose => {
            ln_binomial::<f64>(n_total + x_total - 1, n_total).expect("valid binomial")
                - n_total as f64 * (x_total as f64).ln()
        }
        Statistics::Fermi => {
            ln_binomial::<f64>(x_total, n_total).expect("checked above")
                - n_total as f64 * (x_total as f64).ln()
        }
    };

    let without = compensated_sum(&[after[0], after[1], after[2], -before[0], -before[1]]);
    let shifted_after = compensated_sum(&[after[0], after[1], after[2], constant]);
    let shifted_before = compensated_sum(&[before[0], before[1], constant]);
    Ok(InertnessCheck {
        without_correction: without,
        with_correction: shifted_after - shifted_before,
    })
}

/// A normalized one-particle state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct OneParticleState {
    amplitudes: Vec<Complex64>,
}

impl OneParticleState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self, QuantumError> {
        if amplitudes.is_empty() {
            return Err(QuantumError::EmptyBasis);
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if norm <= 0.0 {
            return Err(QuantumError::ZeroState);
        }
        let scale = norm.sqrt();
        Ok(Self {
            amplitudes: amplitudes.into_iter().map(|a| a / scale).collect(),
        })
    }

    /// The basis state concentrated on one mode.
    pub fn basis_state(modes: usize, mode: usize) -> Result<Self, QuantumError> {
        if modes == 0 || mode >= modes {
            return Err(QuantumError::EmptyBasis);
        }
        let mut amplitudes = vec![Complex64::ZERO; modes];
        amplitudes[mode] = Complex64::ONE;
        Self::new(amplitudes)
    }

    pub fn modes(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitude(&self, mode: usize) -> Complex64 {
        self.amplitudes[mode]
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymmetryClass {
    Symmetric,
    Antisymmetric,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParticleLabel {
    First,
    Second,
}

/// Complex amplitudes over the labeled product basis of two one-particle
/// states.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoParticleState {
    modes: usize,
    amplitudes: Vec<Complex64>,
    symmetry: SymmetryClass,
}

impl TwoParticleState {
    /// A labeled product state `|a>_1 |b>_2`; no exchange symmetry.
    pub fn product(a: &OneParticleState, b: &OneParticleState) -> Result<Self, QuantumError> {
        if a.modes() != b.modes() {
            return Err(QuantumError::DimensionMismatch);
        }
        let modes = a.modes();
        let mut amplitudes = vec![Complex64::ZERO; modes * modes];
        for i in 0..modes {
            for j in 0..modes {
                amplitudes[i * modes + j] = a.amplitude(i) * b.amplitude(j);
            }
        }
        Ok(Self {
            modes,
            amplitudes,
            symmetry: SymmetryClass::None,
        })
    }

    #[cfg(test)]
    pub(crate) fn from_raw(
        modes: usize,
        amplitudes: Vec<Complex64>,
        symmetry: SymmetryClass,
    ) -> Self {
        Self {
            modes,
            amplitudes,
            symmetry,
        }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn symmetry(&self) -> SymmetryClass {
        self.symmetry
    }

    pub fn amplitude(&self, first_mode: usize, second_mode: usize) -> Complex64 {
        self.amplitudes[first_mode * self.modes + second_mode]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Largest violation of `a(i,j) = -a(j,i)` (with `a(i,i) = 0`).
    pub fn antisymmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.modes {
            for j in 0..self.modes {
                let defect = (self.amplitude(i, j) + self.amplitude(j, i)).norm();
                worst = worst.max(defect);
            }
        }
        worst
    }
}

/// The normalized antisymmetric combination
/// `(|phi>_1 |psi>_2 - |psi>_1 |phi>_2) / sqrt(2)`.
///
/// The inputs must be orthogonal; that is what makes `1/sqrt(2)` the right
/// normalization, and `phi = psi` (Pauli exclusion, the zero vector) is
/// rejected by the same check.
pub fn antisymmetrize(
    phi: &OneParticleState,
    psi: &OneParticleState,
) -> Result<TwoParticleState, QuantumError> {
    if phi.modes() != psi.modes() {
        return Err(QuantumError::DimensionMismatch);
    }
    let overlap = phi.inner(psi).norm();
    if overlap > ORTHOGONALITY_TOLERANCE {
        return Err(QuantumError::NonOrthogonal { overlap });
    }
    let modes = phi.modes();
    let inv_sqrt2 = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut amplitudes = vec![Complex64::ZERO; modes * modes];
    for i in 0..modes {
        for j in 0..modes {
            amplitudes[i * modes + j] = inv_sqrt2
                * (phi.amplitude(i) * psi.amplitude(j) - psi.amplitude(i) * phi.amplitude(j));
        }
    }
    Ok(TwoParticleState {
        modes,
        amplitudes,
        symmetry: SymmetryClass::Antisymmetric,
    })
}

/// A density matrix over the one-particle modes.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    modes: usize,
    elements: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn element(&self, row: usize, column: usize) -> Complex64 {
        self.elements[row * self.modes + column]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.modes).map(|i| self.element(i, i)).sum()
    }

    /// Largest violation of hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.modes {
            for j in 0..self.modes {
                worst = worst.max((self.element(i, j) - self.element(j, i).conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues, descending, by cyclic Jacobi rotations; fine for the
    /// mode counts used here.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let n = self.modes;
        let mut a = self.elements.clone();
        let off_diagonal = |m: &[Complex64]| -> f64 {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        s += m[i * n + j].norm_sqr();
                    }
                }
            }
            s
        };
        for _sweep in 0..64 {
            if off_diagonal(&a) < 1e-28 {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[p * n + q];
                    if apq.norm() < 1e-300 {
                        continue;
                    }
                    let app = a[p * n + p].re;
                    let aqq = a[q * n + q].re;
                    let phase = apq / apq.norm();
                    let tau = (aqq - app) / (2.0 * apq.norm());
                    let t = if tau >= 0.0 {
                        1.0 / (tau + (1.0 + tau * tau).sqrt())
                    } else {
                        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    // columns p, q of A R
                    let mut rotated = a.clone();
                    for k in 0..n {
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        rotated[k * n + p] = akp * c - akq * phase.conj() * s;
                        rotated[k * n + q] = akp * phase * s + akq * c;
                    }
                    // rows p, q of R^dagger (A R)
                    let mut next = rotated.clone();
                    for k in 0..n {
                        let apk = rotated[p * n + k];
                        let aqk = rotated[q * n + k];
                        next[p * n + k] = apk * c - aqk * phase * s;
                        next[q * n + k] = apk * phase.conj() * s + aqk * c;
                    }
                    a = next;
                }
            }
        }
        let mut eigenvalues: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
        eigenvalues.sort_by(|x, y| y.partial_cmp(x).unwrap());
        eigenvalues
    }

    /// Checks the density-matrix contract: Hermitian, unit trace,
    /// eigenvalues bounded below by `-1e-12`.
    pub fn validate(&self) -> Result<(), String> {
        let hermiticity = self.hermiticity_defect();
        if hermiticity > HERMITIAN_TOLERANCE {
            return Err(format!("hermiticity defect {hermiticity:.3e}"));
        }
        let trace = self.trace();
        if (trace.re - 1.0).abs() > HERMITIAN_TOLERANCE || trace.im.abs() > HERMITIAN_TOLERANCE {
            return Err(format!("trace {trace}"));
        }
        if let Some(lowest) = self.eigenvalues().last() {
            if *lowest < -HERMITIAN_TOLERANCE {
                return Err(format!("negative eigenvalue {lowest:.3e}"));
            }
        }
        Ok(())
    }
}

/// Partial trace of a two-particle state over the other label.
pub fn reduced_density_matrix(state: &TwoParticleState, keep: ParticleLabel) -> DensityMatrix {
    let n = state.modes();
    let mut elements = vec![Complex64::ZERO; n * n];
    for row in 0..n {
        for column in 0..n {
            let mut sum = Complex64::ZERO;
            for traced in 0..n {
                sum += match keep {
                    ParticleLabel::First => {
                        state.amplitude(row, traced) * state.amplitude(column, traced).conj()
                    }
                    ParticleLabel::Second => {
                        state.amplitude(traced, row) * state.amplitude(traced, column).conj()
                    }
                };
            }
            elements[row * n + column] = sum;
        }
    }
    DensityMatrix { modes: n, elements }
}

/// A one-particle unitary, validated to `U^dagger U = 1` on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    modes: usize,
    elements: Vec<Complex64>,
}

impl UnitaryMatrix {
    pub fn new(modes: usize, elements: Vec<Complex64>) -> Result<Self, QuantumError> {
        if modes == 0 || elements.len() != modes * modes {
            return Err(QuantumError::DimensionMismatch);
        }
        let candidate = Self { modes, elements };
        if candidate.unitarity_defect() > UNITARY_TOLERANCE {
            return Err(QuantumError::NonUnitary);
        }
        Ok(candidate)
    }

    pub fn identity(modes: usize) -> Result<Self, QuantumError> {
        let mut elements = vec![Complex64::ZERO; modes * modes];
        for i in 0..modes {
            elements[i * modes + i] = Complex64::ONE;
        }
        Self::new(modes, elements)
    }

    /// Diagonal matrix of pure phases.
    pub fn diagonal_phases(phases: &[f64]) -> Result<Self, QuantumError> {
        let modes = phases.len();
        let mut elements = vec![Complex64::ZERO; modes * modes];
        for (i, &phase) in phases.iter().enumerate() {
            elements[i * modes + i] = Complex64::from_polar(1.0, phase);
        }
        Self::new(modes, elements)
    }

    /// [`Self::haar_random`] drawn from a fresh stream for the given seed.
    pub fn haar_seeded(modes: usize, seed: u64) -> Result<Self, QuantumError> {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        Self::haar_random(modes, &mut rng)
    }

    /// Haar-distributed random unitary: Gram-Schmidt on a complex Gaussian
    /// matrix, with the phase convention fixed per column.
    pub fn haar_random<R: Rng + ?Sized>(modes: usize, rng: &mut R) -> Result<Self, QuantumError> {
        if modes == 0 {
            return Err(QuantumError::EmptyBasis);
        }
        let mut columns: Vec<Vec<Complex64>> = Vec::with_capacity(modes);
        for _ in 0..modes {
            let mut column: Vec<Complex64> = (0..modes)
                .map(|_| {
                    let (re, im) = standard_normal_pair(rng);
                    Complex64::new(re, im)
                })
                .collect();
            for previous in &columns {
                let projection: Complex64 = previous
                    .iter()
                    .zip(&column)
                    .map(|(p, c)| p.conj() * c)
                    .sum();
                for (c, p) in column.iter_mut().zip(previous) {
                    *c -= projection * p;
                }
            }
            let norm: f64 = column.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            let leading_phase = column
                .iter()
                .find(|c| c.norm() > 1e-12)
                .map(|c| c / c.norm())
                .unwrap_or(Complex64::ONE);
            for c in column.iter_mut() {
                *c /= norm * leading_phase;
            }
            columns.push(column);
        }
        let mut elements = vec![Complex64::ZERO; modes * modes];
        for (j, column) in columns.iter().enumerate() {
            for (i, &value) in column.iter().enumerate() {
                elements[i * modes + j] = value;
            }
        }
        Self::new(modes, elements)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn element(&self, row: usize, column: usize) -> Complex64 {
        self.elements[row * self.modes + column]
    }

    fn unitarity_defect(&self) -> f64 {
        let n = self.modes;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let mut dot = Complex64::ZERO;
                for k in 0..n {
                    dot += self.element(k, i).conj() * self.element(k, j);
                }
                let expected = if i == j {
                    Complex64::ONE
                } else {
                    Complex64::ZERO
                };
                worst = worst.max((dot - expected).norm());
            }
        }
        worst
    }

    pub fn apply(&self, state: &OneParticleState) -> Result<OneParticleState, QuantumError> {
        if state.modes() != self.modes {
            return Err(QuantumError::DimensionMismatch);
        }
        let n = self.modes;
        let mut amplitudes = vec![Complex64::ZERO; n];
        for (i, amplitude) in amplitudes.iter_mut().enumerate() {
            for j in 0..n {
                *amplitude += self.element(i, j) * state.amplitude(j);
            }
        }
        // unitaries preserve the norm; no renormalization, drift stays
        // observable
        Ok(OneParticleState { amplitudes })
    }

    /// `U (x) U` acting on both labels of a two-particle state.
    pub fn apply_to_pair(
        &self,
        state: &TwoParticleState,
    ) -> Result<TwoParticleState, QuantumError> {
        if state.modes() != self.modes {
            return Err(QuantumError::DimensionMismatch);
        }
        let n = self.modes;
        let mut amplitudes = vec![Complex64::ZERO; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut sum = Complex64::ZERO;
                for k in 0..n {
                    for l in 0..n {
                        sum += self.element(i, k) * self.element(j, l) * state.amplitude(k, l);
                    }
                }
                amplitudes[i * n + j] = sum;
            }
        }
        Ok(TwoParticleState {
            modes: n,
            amplitudes,
            symmetry: state.symmetry(),
        })
    }
}

/// Applies `U` repeatedly to two orthogonal states and returns the largest
/// `|<U^k phi | U^k psi>|` seen. Unitarity preserves inner products, so
/// anything above numerical drift (contract: 1e-10 for up to 10^4 steps)
/// would falsify the orthogonality-preservation claim.
pub fn evolve_and_check_orthogonality(
    phi: &OneParticleState,
    psi: &OneParticleState,
    unitary: &UnitaryMatrix,
    steps: u32,
) -> Result<f64, QuantumError> {
    if phi.modes() != psi.modes() || phi.modes() != unitary.modes() {
        return Err(QuantumError::DimensionMismatch);
    }
    let initial_overlap = phi.inner(psi).norm();
    if initial_overlap > ORTHOGONALITY_TOLERANCE {
        return Err(QuantumError::NonOrthogonal {
            overlap: initial_overlap,
        });
    }
    let mut current_phi = phi.clone();
    let mut current_psi = psi.clone();
    let mut max_overlap = 0.0f64;
    for _ in 0..steps {
        current_phi = unitary.apply(&current_phi)?;
        current_psi = unitary.apply(&current_psi)?;
        max_overlap = max_overlap.max(current_phi.inner(&current_psi).norm());
    }
    Ok(max_overlap)
}
