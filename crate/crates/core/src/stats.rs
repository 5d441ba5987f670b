//! Numerical utilities shared by the scenario engine and the simulator:
//! compensated summation and a chi-square goodness-of-fit test.

use rand::Rng;
use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StatsError {
    #[error("observed and expected bins must have equal, nonzero length")]
    BinMismatch,
    #[error("chi-square needs at least two pooled bins")]
    TooFewBins,
}

/// Neumaier-compensated sum. The result is the exact real sum rounded once,
/// up to second-order terms in machine epsilon — exactly-cancelling term
/// pairs therefore cancel instead of leaving `n * eps * scale` residue.
pub fn compensated_sum<T: Real>(terms: &[T]) -> T {
    let mut sum = T::zero();
    let mut compensation = T::zero();
    for &term in terms {
        let t = sum + term;
        if sum.abs() >= term.abs() {
            compensation += (sum - t) + term;
        } else {
            compensation += (term - t) + sum;
        }
        sum = t;
    }
    sum + compensation
}

/// Box-Muller pair of independent standard normals.
pub fn standard_normal_pair<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random();
    let radius = (-2.0 * u1.ln()).sqrt();
    let angle = 2.0 * std::f64::consts::PI * u2;
    (radius * angle.cos(), radius * angle.sin())
}

/// Lanczos approximation of `ln Gamma(x)` for `x > 0`.
fn ln_gamma(x: f64) -> f64 {
    const COEFFICIENTS: [f64; 6] = [
        76.18009172947146,
        -86.50532032941677,
        24.01409824083091,
        -1.231739572450155,
        0.1208650973866179e-2,
        -0.5395239384953e-5,
    ];
    let mut y = x;
    let tmp = x + 5.5;
    let tmp = tmp - (x + 0.5) * tmp.ln();
    let mut series = 1.000000000190015;
    for c in COEFFICIENTS {
        y += 1.0;
        series += c / y;
    }
    -tmp + (2.5066282746310005 * series / x).ln()
}

/// Regularized lower incomplete gamma `P(s, x)` by series expansion.
fn gamma_p_series(s: f64, x: f64) -> f64 {
    let mut term = 1.0 / s;
    let mut sum = term;
    let mut a = s;
    for _ in 0..500 {
        a += 1.0;
        term *= x / a;
        sum += term;
        if term.abs() < sum.abs() * 1e-16 {
            break;
        }
    }
    sum * (-x + s * x.ln() - ln_gamma(s)).exp()
}

/// Regularized upper incomplete gamma `Q(s, x)` by continued fraction.
fn gamma_q_continued_fraction(s: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - s;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -(i as f64) * (i as f64 - s);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h * (-x + s * x.ln() - ln_gamma(s)).exp()
}

/// Regularized upper incomplete gamma `Q(s, x) = 1 - P(s, x)` for `s > 0`.
pub fn gamma_q(s: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < s + 1.0 {
        1.0 - gamma_p_series(s, x)
    } else {
        gamma_q_continued_fraction(s, x)
    }
}

/// Survival function of the chi-square distribution with `dof` degrees of
/// freedom, i.e. the p-value of an observed statistic.
pub fn chi_square_pvalue(statistic: f64, dof: u64) -> f64 {
    gamma_q(dof as f64 / 2.0, statistic / 2.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: u64,
    pub p_value: f64,
    pub pooled_bins: usize,
}

/// Pearson chi-square goodness of fit of observed counts against expected
/// counts. Bins with expected count below 5 are pooled with their neighbor
/// toward the middle, as usual for tail bins of a sharply peaked reference.
pub fn chi_square_goodness_of_fit(
    observed: &[f64],
    expected: &[f64],
) -> Result<ChiSquareResult, StatsError> {
    if observed.len() != expected.len() || observed.is_empty() {
        return Err(StatsError::BinMismatch);
    }
    let mut pooled: Vec<(f64, f64)> = Vec::new();
    let mut acc_obs = 0.0;
    let mut acc_exp = 0.0;
    for (&o, &e) in observed.iter().zip(expected) {
        acc_obs += o;
        acc_exp += e;
        if acc_exp >= 5.0 {
            pooled.push((acc_obs, acc_exp));
            acc_obs = 0.0;
            acc_exp = 0.0;
        }
    }
    if acc_exp > 0.0 || acc_obs > 0.0 {
        if let Some(last) = pooled.last_mut() {
            last.0 += acc_obs;
            last.1 += acc_exp;
        } else {
            pooled.push((acc_obs, acc_exp));
        }
    }
    if pooled.len() < 2 {
        return Err(StatsError::TooFewBins);
    }
    let statistic: f64 = pooled
        .iter()
        .map(|&(o, e)| {
            let d = o - e;
            d * d / e
        })
        .sum();
    let dof = pooled.len() as u64 - 1;
    Ok(ChiSquareResult {
        statistic,
        dof,
        p_value: chi_square_pvalue(statistic, dof),
        pooled_bins: pooled.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn compensated_sum_cancels_paired_terms() {
        let big = 1.0e15;
        let terms = [3.5f64, big, 1.25, -big, -1.25];
        assert_eq!(compensated_sum(&terms), 3.5);
    }

    #[test]
    fn ln_gamma_matches_factorials() {
        for n in 1..=20u64 {
            let exact = crate::logcomb::ln_factorial::<f64>(n);
            assert_relative_eq!(ln_gamma(n as f64 + 1.0), exact, epsilon = 1e-9);
        }
    }

    #[test]
    fn gamma_q_agrees_with_exponential_tail() {
        // Q(1, x) = exp(-x)
        for x in [0.1, 1.0, 3.5, 10.0] {
            assert_relative_eq!(gamma_q(1.0, x), (-x).exp(), epsilon = 1e-10);
        }
    }

    #[test]
    fn chi_square_pvalues_match_tabulated_quantiles() {
        // 95% critical values for df = 1, 5, 10
        assert_relative_eq!(chi_square_pvalue(3.841, 1), 0.05, epsilon = 2e-4);
        assert_relative_eq!(chi_square_pvalue(11.070, 5), 0.05, epsilon = 2e-4);
        assert_relative_eq!(chi_square_pvalue(18.307, 10), 0.05, epsilon = 2e-4);
    }

    #[test]
    fn goodness_of_fit_accepts_its_own_expectation() {
        let expected = [10.0, 20.0, 40.0, 20.0, 10.0];
        let observed = [11.0, 19.0, 41.0, 18.0, 11.0];
        let result = chi_square_goodness_of_fit(&observed, &expected).unwrap();
        assert!(result.p_value > 0.5, "p = {}", result.p_value);
        assert_eq!(result.dof, 4);
    }

    #[test]
    fn goodness_of_fit_rejects_a_shifted_distribution() {
        let expected = [10.0, 20.0, 40.0, 20.0, 10.0];
        let observed = [40.0, 30.0, 20.0, 8.0, 2.0];
        let result = chi_square_goodness_of_fit(&observed, &expected).unwrap();
        assert!(result.p_value < 1e-6, "p = {}", result.p_value);
    }

    #[test]
    fn sparse_tails_are_pooled() {
        let expected = [0.5, 1.0, 6.0, 50.0, 6.0, 1.0, 0.5];
        let observed = [1.0, 1.0, 5.0, 51.0, 5.0, 1.0, 1.0];
        let result = chi_square_goodness_of_fit(&observed, &expected).unwrap();
        assert!(result.pooled_bins < expected.len());
        assert!(result.p_value > 0.1);
    }

    #[test]
    fn degenerate_inputs_error() {
        assert_eq!(
            chi_square_goodness_of_fit(&[1.0], &[1.0, 2.0]),
            Err(StatsError::BinMismatch)
        );
        assert_eq!(
            chi_square_goodness_of_fit(&[1.0], &[1.0]),
            Err(StatsError::TooFewBins)
        );
    }
}
