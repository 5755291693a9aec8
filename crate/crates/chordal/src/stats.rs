//! Chi-square goodness-of-fit helpers for the statistical test suites.
//!
//! Only test code and the `verify` command use this; nothing on a sampling
//! path touches floating point.

/// ln Gamma(x) by the Lanczos approximation (g = 7, n = 9).
fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        // reflection
        std::f64::consts::PI.ln() - (std::f64::consts::PI * x).sin().ln() - ln_gamma(1.0 - x)
    } else {
        let x = x - 1.0;
        let mut a = COEF[0];
        let t = x + 7.5;
        for (i, &c) in COEF.iter().enumerate().skip(1) {
            a += c / (x + i as f64);
        }
        0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
    }
}

/// Regularized lower incomplete gamma P(a, x) by series expansion.
fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut sum = 1.0 / a;
    let mut term = sum;
    let mut n = a;
    for _ in 0..500 {
        n += 1.0;
        term *= x / n;
        sum += term;
        if term.abs() < sum.abs() * 1e-15 {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

/// Regularized upper incomplete gamma Q(a, x) by continued fraction.
fn gamma_q_cf(a: f64, x: f64) -> f64 {
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-15 {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

/// Q(a, x) = 1 - P(a, x), the upper tail.
fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - gamma_p_series(a, x)
    } else {
        gamma_q_cf(a, x)
    }
}

/// Upper-tail p-value of a chi-square statistic with `df` degrees of freedom.
pub fn chi_square_pvalue(stat: f64, df: usize) -> f64 {
    gamma_q(df as f64 / 2.0, stat / 2.0)
}

/// Chi-square statistic of observed counts against expected counts.
pub fn chi_square_stat(observed: &[u64], expected: &[f64]) -> f64 {
    assert_eq!(observed.len(), expected.len());
    observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| {
            let d = o as f64 - e;
            d * d / e
        })
        .sum()
}

/// Goodness-of-fit p-value for observed counts against a uniform distribution
/// over the bins.
pub fn uniform_fit_pvalue(observed: &[u64]) -> f64 {
    let total: u64 = observed.iter().sum();
    let e = total as f64 / observed.len() as f64;
    let expected = vec![e; observed.len()];
    chi_square_pvalue(chi_square_stat(observed, &expected), observed.len() - 1)
}

/// Goodness-of-fit p-value against arbitrary weights (need not be normalized).
pub fn weighted_fit_pvalue(observed: &[u64], weights: &[f64]) -> f64 {
    assert_eq!(observed.len(), weights.len());
    let total: u64 = observed.iter().sum();
    let wsum: f64 = weights.iter().sum();
    let expected: Vec<f64> = weights.iter().map(|w| total as f64 * w / wsum).collect();
    chi_square_pvalue(chi_square_stat(observed, &expected), observed.len() - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_chi_square_tail_values() {
        // Standard table values.
        let cases = [
            (3.841, 1, 0.05),
            (13.8155, 2, 0.001),
            (9.488, 4, 0.05),
            (29.588, 10, 0.001),
            (99.607, 60, 0.001),
        ];
        for (stat, df, p) in cases {
            let got = chi_square_pvalue(stat, df);
            assert!(
                (got - p).abs() < 2e-4,
                "df={df}: p({stat}) = {got}, want ~{p}"
            );
        }
    }

    #[test]
    fn uniform_fit_sane() {
        assert!(uniform_fit_pvalue(&[100, 101, 99, 100]) > 0.9);
        assert!(uniform_fit_pvalue(&[200, 50, 50, 100]) < 1e-6);
    }
}
