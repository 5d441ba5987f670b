//! Log-domain combinatorics: exact `ln n!`, binomials and multinomials.
//!
//! Every entropy formula in this crate is a difference of logarithms of
//! astronomically large counts, so counts are carried as natural logs from
//! the start. `ln n!` is exact (cumulative summation) up to
//! [`DIRECT_SUMMATION_LIMIT`] and switches to a Stirling series beyond it,
//! where the series truncation error is far below the summation rounding.

use std::ops::{Div, Mul};
use std::sync::OnceLock;

use thiserror::Error;

use crate::scalar::Real;

/// Largest `n` for which `ln n!` is taken from the cumulative table.
/// Beyond this the Stirling series with terms through `1/(360 n^3)` is used;
/// its truncation error there (< 1/(1260 n^5)) is below table rounding.
pub const DIRECT_SUMMATION_LIMIT: u64 = 1_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LogCombError {
    #[error("binomial requires k <= n, got k = {k}, n = {n}")]
    BinomialOutOfRange { n: u64, k: u64 },
    #[error("multinomial parts sum to {sum}, expected {n}")]
    MultinomialMismatch { n: u64, sum: u64 },
    #[error("the Stirling closed form requires n >= 1")]
    StirlingAtZero,
    #[error("a log-domain quantity must come from a strictly positive value")]
    NonPositiveValue,
}

/// A nonnegative count or probability stored as its natural logarithm.
///
/// Multiplication of quantities is addition of logs, division is
/// subtraction. This is what keeps `N!` at desk scale (`N ~ 10^6`) finite.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LogQuantity<T> {
    ln_value: T,
}

impl<T: Real> LogQuantity<T> {
    /// Wraps an already-computed natural logarithm.
    pub fn from_ln(ln_value: T) -> Self {
        Self { ln_value }
    }

    /// Takes the log of a strictly positive value.
    pub fn from_value(value: T) -> Result<Self, LogCombError> {
        if !value.is_finite() || value <= T::zero() {
            return Err(LogCombError::NonPositiveValue);
        }
        Ok(Self {
            ln_value: value.ln(),
        })
    }

    pub fn ln(&self) -> T {
        self.ln_value
    }

    /// The quantity itself; overflows to `inf` when it has no
    /// representation in `T`.
    pub fn value(&self) -> T {
        self.ln_value.exp()
    }
}

impl<T: Real> Mul for LogQuantity<T> {
    type Output = Self;
    // multiplication of quantities is addition of their logs
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: Self) -> Self {
        Self::from_ln(self.ln_value + rhs.ln_value)
    }
}

impl<T: Real> Div for LogQuantity<T> {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Self) -> Self {
        Self::from_ln(self.ln_value - rhs.ln_value)
    }
}

/// Lazily built cumulative table of `ln n!` for `n <= DIRECT_SUMMATION_LIMIT`.
///
/// Build-once semantics; any number of concurrent readers afterwards.
pub struct LnFactorialTable<T> {
    cell: OnceLock<Vec<T>>,
}

impl<T: Real> LnFactorialTable<T> {
    pub const fn new() -> Self {
        Self {
            cell: OnceLock::new(),
        }
    }

    fn entries(&self) -> &[T] {
        self.cell.get_or_init(build_table)
    }
}

impl<T: Real> Default for LnFactorialTable<T> {
    fn default() -> Self {
        Self::new()
    }
}

/// Cumulative sums of `ln k` with Neumaier compensation; plain left-to-right
/// summation would lose ~1e-6 absolute by n = 10^6, which the Stirling
/// cross-checks cannot absorb.
fn build_table<T: Real>() -> Vec<T> {
    let limit = DIRECT_SUMMATION_LIMIT as usize;
    let mut table = Vec::with_capacity(limit + 1);
    table.push(T::zero()); // ln 0! = 0
    let mut sum = T::zero();
    let mut compensation = T::zero();
    for k in 1..=limit {
        let term = T::of_u64(k as u64).ln();
        let t = sum + term;
        if sum.abs() >= term.abs() {
            compensation += (sum - t) + term;
        } else {
            compensation += (term - t) + sum;
        }
        sum = t;
        table.push(sum + compensation);
    }
    table
}

/// `ln n!`, exact to accumulated rounding for any nonnegative `n`.
pub fn ln_factorial<T: Real>(n: u64) -> T {
    if n <= DIRECT_SUMMATION_LIMIT {
        T::ln_factorial_table().entries()[n as usize]
    } else {
        stirling_series(T::of_u64(n))
    }
}

/// Stirling series through the `1/(360 n^3)` term.
fn stirling_series<T: Real>(n: T) -> T {
    let half = T::of_f64(0.5);
    let two_pi = T::of_f64(2.0) * T::PI();
    let base = n * n.ln() - n + half * (two_pi * n).ln();
    let n2 = n * n;
    base + T::one() / (T::of_f64(12.0) * n) - T::one() / (T::of_f64(360.0) * n2 * n)
}

/// The bare Stirling closed form `n ln n - n + (1/2) ln(2 pi n)`.
///
/// Underestimates `ln n!` by at most `1/(12 n)`.
pub fn stirling_ln_factorial<T: Real>(n: u64) -> Result<T, LogCombError> {
    if n == 0 {
        return Err(LogCombError::StirlingAtZero);
    }
    let nf = T::of_u64(n);
    let half = T::of_f64(0.5);
    let two_pi = T::of_f64(2.0) * T::PI();
    Ok(nf * nf.ln() - nf + half * (two_pi * nf).ln())
}

/// `ln C(n, k)`.
///
/// Always evaluated as `ln n! - (ln k! + ln (n-k)!)`; the parenthesised sum
/// commutes bit-exactly, so `ln_binomial(n, k) == ln_binomial(n, n - k)`
/// holds as a float identity.
pub fn ln_binomial<T: Real>(n: u64, k: u64) -> Result<T, LogCombError> {
    if k > n {
        return Err(LogCombError::BinomialOutOfRange { n, k });
    }
    let numerator: T = ln_factorial(n);
    let left: T = ln_factorial(k);
    let right: T = ln_factorial(n - k);
    Ok(numerator - (left + right))
}

/// `ln( n! / (parts_0! parts_1! ...) )` with `sum(parts) == n` required.
pub fn ln_multinomial<T: Real>(n: u64, parts: &[u64]) -> Result<T, LogCombError> {
    let sum: u64 = parts.iter().sum();
    if sum != n {
        return Err(LogCombError::MultinomialMismatch { n, sum });
    }
    let mut denominator = T::zero();
    for &part in parts {
        denominator += ln_factorial::<T>(part);
    }
    Ok(ln_factorial::<T>(n) - denominator)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Independent oracle: Pascal-triangle binomials in exact integers.
    fn pascal_binomial(n: usize, k: usize) -> u128 {
        let mut row = vec![0u128; n + 1];
        row[0] = 1;
        for _ in 0..n {
            for j in (1..=n).rev() {
                row[j] += row[j - 1];
            }
        }
        row[k]
    }

    /// Independent oracle: ln n! by naive per-call summation.
    fn summed_ln_factorial(n: u64) -> f64 {
        (2..=n).map(|k| (k as f64).ln()).sum()
    }

    #[test]
    fn ln_factorial_base_cases() {
        assert_eq!(ln_factorial::<f64>(0), 0.0);
        assert_eq!(ln_factorial::<f64>(1), 0.0);
        assert_relative_eq!(
            ln_factorial::<f64>(10),
            15.104412573075516,
            max_relative = 1e-15
        );
    }

    #[test]
    fn ln_factorial_matches_summation_oracle() {
        for n in [2u64, 5, 17, 100, 1234, 99_999] {
            assert_relative_eq!(
                ln_factorial::<f64>(n),
                summed_ln_factorial(n),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn ln_factorial_is_continuous_across_the_table_boundary() {
        let at_limit = ln_factorial::<f64>(DIRECT_SUMMATION_LIMIT);
        let above = ln_factorial::<f64>(DIRECT_SUMMATION_LIMIT + 1);
        let step = ((DIRECT_SUMMATION_LIMIT + 1) as f64).ln();
        assert_relative_eq!(above - at_limit, step, max_relative = 1e-9);
    }

    #[test]
    fn stirling_closed_form_examples() {
        // n = 1: 0.5 ln(2 pi) - 1, off from ln 1! = 0 by less than 1/12
        let s1 = stirling_ln_factorial::<f64>(1).unwrap();
        assert_relative_eq!(s1, -0.08106146679532726, max_relative = 1e-14);
        assert!(s1.abs() <= 1.0 / 12.0);

        // n = 10: within 1/120 of the exact value
        let s10 = stirling_ln_factorial::<f64>(10).unwrap();
        assert!((s10 - ln_factorial::<f64>(10)).abs() <= 1.0 / 120.0);

        // n = 10^6: within 1e-7 of the direct-summation table
        let s = stirling_ln_factorial::<f64>(1_000_000).unwrap();
        assert!((s - ln_factorial::<f64>(1_000_000)).abs() <= 1e-7);

        assert_eq!(
            stirling_ln_factorial::<f64>(0),
            Err(LogCombError::StirlingAtZero)
        );
    }

    #[test]
    fn stirling_error_bound_holds_on_a_grid() {
        // |stirling - exact| * 12 n <= 1 for all tested n in 1..=10^4.
        // The real-arithmetic margin is 1/(30 n^2), which falls below f64
        // rounding of the two ~1e5-sized logs near the top of the grid, so
        // the check carries a 1e-4 rounding allowance.
        for n in 1..=10_000u64 {
            let err = (stirling_ln_factorial::<f64>(n).unwrap() - ln_factorial::<f64>(n)).abs();
            assert!(
                err * 12.0 * n as f64 <= 1.0 + 1e-4,
                "Stirling bound violated at n = {n}: {err}"
            );
        }
    }

    #[test]
    fn binomial_examples_and_domain_errors() {
        assert_relative_eq!(
            ln_binomial::<f64>(2, 1).unwrap(),
            2.0f64.ln(),
            max_relative = 1e-15
        );
        assert_eq!(ln_binomial::<f64>(7, 0).unwrap(), 0.0);
        assert_eq!(ln_binomial::<f64>(0, 0).unwrap(), 0.0);
        // C(4, 2) = 6 two-element subsets of a 4-set
        assert_relative_eq!(
            ln_binomial::<f64>(4, 2).unwrap(),
            6.0f64.ln(),
            max_relative = 1e-15
        );
        assert_eq!(
            ln_binomial::<f64>(3, 5),
            Err(LogCombError::BinomialOutOfRange { n: 3, k: 5 })
        );
    }

    #[test]
    fn binomial_rounds_to_pascal_triangle_up_to_20() {
        for n in 0..=20usize {
            for k in 0..=n {
                let exact = pascal_binomial(n, k);
                let recovered = ln_binomial::<f64>(n as u64, k as u64).unwrap().exp();
                assert_eq!(
                    recovered.round() as u128,
                    exact,
                    "C({n}, {k}) disagrees with Pascal recursion"
                );
            }
        }
    }

    #[test]
    fn multinomial_examples() {
        assert_relative_eq!(
            ln_multinomial::<f64>(4, &[2, 2]).unwrap(),
            6.0f64.ln(),
            max_relative = 1e-15
        );
        assert_eq!(ln_multinomial::<f64>(9, &[9]).unwrap(), 0.0);
        // 3! = 6 orderings
        assert_relative_eq!(
            ln_multinomial::<f64>(3, &[1, 1, 1]).unwrap(),
            6.0f64.ln(),
            max_relative = 1e-15
        );
        assert_eq!(
            ln_multinomial::<f64>(4, &[1, 2]),
            Err(LogCombError::MultinomialMismatch { n: 4, sum: 3 })
        );
    }

    #[test]
    fn two_part_multinomial_is_the_binomial_bit_for_bit() {
        for (n, k) in [(4u64, 2u64), (100, 37), (20_000, 10_000), (9, 0)] {
            assert_eq!(
                ln_multinomial::<f64>(n, &[k, n - k]).unwrap(),
                ln_binomial::<f64>(n, k).unwrap()
            );
        }
    }

    #[test]
    fn log_quantity_follows_log_arithmetic() {
        let a = LogQuantity::from_value(6.0f64).unwrap();
        let b = LogQuantity::from_value(2.0f64).unwrap();
        assert_relative_eq!((a * b).value(), 12.0, max_relative = 1e-14);
        assert_relative_eq!((a / b).value(), 3.0, max_relative = 1e-14);
        assert_eq!(
            LogQuantity::<f64>::from_value(0.0),
            Err(LogCombError::NonPositiveValue)
        );
        assert_eq!(
            LogQuantity::<f64>::from_value(-1.0),
            Err(LogCombError::NonPositiveValue)
        );
    }

    #[test]
    fn table_is_shared_across_threads() {
        let handles: Vec<_> = (0..8)
            .map(|i| std::thread::spawn(move || ln_factorial::<f64>(1000 + i as u64)))
            .collect();
        for handle in handles {
            assert!(handle.join().unwrap().is_finite());
        }
    }

    #[test]
    fn works_in_f32_as_well() {
        let lnc: f32 = ln_binomial(10, 5).unwrap();
        assert_relative_eq!(lnc, 252.0f32.ln(), max_relative = 1e-5);
    }

    proptest! {
        #[test]
        fn binomial_symmetry_is_bit_exact(n in 0u64..2000, k in 0u64..2000) {
            prop_assume!(k <= n);
            let lhs = ln_binomial::<f64>(n, k).unwrap();
            let rhs = ln_binomial::<f64>(n, n - k).unwrap();
            prop_assert_eq!(lhs.to_bits(), rhs.to_bits());
        }

        #[test]
        fn log_quantity_roundtrip(x in 1e-300f64..1e300) {
            let q = LogQuantity::from_value(x).unwrap();
            // one ulp of the stored log scales by |ln x| in the value
            let tolerance = (4.0 + 2.0 * q.ln().abs()) * f64::EPSILON * x;
            prop_assert!((q.value() - x).abs() <= tolerance);
        }

        #[test]
        fn multinomial_is_nonnegative(n in 0u64..300, split in 0u64..300) {
            prop_assume!(split <= n);
            let parts = [split, n - split];
            prop_assert!(ln_multinomial::<f64>(n, &parts).unwrap() >= -1e-12);
        }
    }
}
