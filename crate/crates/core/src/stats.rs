//! Sample summaries and Welch's two-sample t-test.

use serde::{Deserialize, Serialize};

use crate::error::{usage, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator); 0 when `n == 1`.
    pub std: f64,
}

impl SampleSummary {
    pub fn new(n: usize, mean: f64, std: f64) -> Result<Self> {
        if n == 0 {
            return usage("a summary needs at least one sample");
        }
        if !(std >= 0.0) || !mean.is_finite() {
            return usage(format!("invalid summary mean={mean} std={std}"));
        }
        Ok(SampleSummary { n, mean, std })
    }

    /// Whether `std` is an actual estimate rather than the n = 1 placeholder.
    pub fn has_spread(&self) -> bool {
        self.n >= 2
    }
}

pub fn summarize(samples: &[f64]) -> Result<SampleSummary> {
    if samples.is_empty() {
        return usage("cannot summarize an empty sample");
    }
    let n = samples.len();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let std = if n < 2 {
        0.0
    } else {
        let ss: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
        (ss / (n - 1) as f64).sqrt()
    };
    Ok(SampleSummary { n, mean, std })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub t_statistic: f64,
    pub degrees_of_freedom: f64,
    pub p_value: f64,
    pub significant: bool,
}

/// Two-sided Welch t-test of `a` against `b`.
pub fn welch_t_test(a: &SampleSummary, b: &SampleSummary, alpha: f64) -> Result<TTestResult> {
    if a.n < 2 || b.n < 2 {
        return usage(format!(
            "Welch test needs n >= 2 in both samples, got {} and {}",
            a.n, b.n
        ));
    }
    let va = a.std * a.std / a.n as f64;
    let vb = b.std * b.std / b.n as f64;
    let se2 = va + vb;
    let diff = a.mean - b.mean;

    if se2 == 0.0 {
        let (t, p) = if diff == 0.0 {
            (0.0, 1.0)
        } else {
            (diff.signum() * f64::INFINITY, 0.0)
        };
        return Ok(TTestResult {
            t_statistic: t,
            degrees_of_freedom: (a.n + b.n - 2) as f64,
            p_value: p,
            significant: p < alpha,
        });
    }

    let t = diff / se2.sqrt();
    let df = se2 * se2 / (va * va / (a.n - 1) as f64 + vb * vb / (b.n - 1) as f64);
    let p = student_t_two_sided_p(t, df).clamp(0.0, 1.0);
    Ok(TTestResult {
        t_statistic: t,
        degrees_of_freedom: df,
        p_value: p,
        significant: p < alpha,
    })
}

/// `P(|T| >= |t|)` for Student's t with `df` degrees of freedom.
pub fn student_t_two_sided_p(t: f64, df: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    reg_inc_beta(df / (df + t * t), 0.5 * df, 0.5)
}

/// CDF of Student's t distribution.
pub fn student_t_cdf(t: f64, df: f64) -> f64 {
    let tail = 0.5 * student_t_two_sided_p(t, df);
    if t >= 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// Lanczos approximation (g = 7, 9 terms).
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = C[0];
    for (i, c) in C.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn reg_inc_beta(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    // The continued fraction converges fast for x < (a + 1) / (a + b + 2).
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(x, a, b) / a
    } else {
        1.0 - front * beta_cf(1.0 - x, b, a) / b
    }
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_cf(x: f64, a: f64, b: f64) -> f64 {
    const MAX_ITER: usize = 500;
    const EPS: f64 = 1e-15;
    const TINY: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;

        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn summary(n: usize, mean: f64, std: f64) -> SampleSummary {
        SampleSummary::new(n, mean, std).unwrap()
    }

    #[test]
    fn summaries() {
        let s = summarize(&[2.0, 4.0]).unwrap();
        assert_eq!(s.mean, 3.0);
        assert!((s.std - 2f64.sqrt()).abs() < 1e-15);

        let s = summarize(&[5.0]).unwrap();
        assert_eq!((s.n, s.mean, s.std), (1, 5.0, 0.0));
        assert!(!s.has_spread());

        let s = summarize(&[1.25; 3]).unwrap();
        assert_eq!((s.mean, s.std), (1.25, 0.0));

        assert!(summarize(&[]).is_err());
    }

    #[test]
    fn identical_samples() {
        let a = summary(30, 6.6, 0.77);
        let r = welch_t_test(&a, &a, 0.05).unwrap();
        assert_eq!(r.t_statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert!(!r.significant);
    }

    #[test]
    fn reference_case() {
        // scipy.stats.ttest_ind_from_stats(1, 1, 10, 0, 1, 10, equal_var=False)
        let r = welch_t_test(&summary(10, 1.0, 1.0), &summary(10, 0.0, 1.0), 0.05).unwrap();
        assert!((r.t_statistic - 2.23606797749979).abs() < 1e-12);
        assert!((r.degrees_of_freedom - 18.0).abs() < 1e-12);
        assert!((r.p_value - 0.038249614516113854).abs() < 1e-9);
        assert!(r.significant);
    }

    #[test]
    fn large_reward_gap() {
        let r = welch_t_test(&summary(30, 6.60, 0.77), &summary(30, 3.25, 2.45), 0.05).unwrap();
        assert!((r.t_statistic - 7.14471425656245).abs() < 1e-9);
        assert!((r.p_value - 2.6229658283658735e-08).abs() < 1e-12);
        assert!(r.significant);
    }

    #[test]
    fn degenerate_variances() {
        let a = summary(5, 1.0, 0.0);
        assert_eq!(welch_t_test(&a, &a, 0.05).unwrap().p_value, 1.0);
        let b = summary(5, 2.0, 0.0);
        let r = welch_t_test(&a, &b, 0.05).unwrap();
        assert_eq!(r.p_value, 0.0);
        assert!(r.t_statistic.is_infinite() && r.t_statistic < 0.0);
        assert!(welch_t_test(&summary(1, 1.0, 0.0), &b, 0.05).is_err());
    }

    #[test]
    fn ln_gamma_known_values() {
        assert!(ln_gamma(1.0).abs() < 1e-14);
        assert!(ln_gamma(2.0).abs() < 1e-14);
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-14);
        assert!((ln_gamma(10.0) - 362880f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn incomplete_beta_closed_forms() {
        // I_x(1, 1) = x; I_x(a, 1) = x^a; I_x(1, b) = 1 - (1 - x)^b
        for &x in &[0.1, 0.37, 0.5, 0.9] {
            assert!((reg_inc_beta(x, 1.0, 1.0) - x).abs() < 1e-14);
            assert!((reg_inc_beta(x, 3.0, 1.0) - x.powi(3)).abs() < 1e-14);
            assert!((reg_inc_beta(x, 1.0, 4.0) - (1.0 - (1.0 - x).powi(4))).abs() < 1e-14);
        }
        assert_eq!(reg_inc_beta(0.0, 2.0, 3.0), 0.0);
        assert_eq!(reg_inc_beta(1.0, 2.0, 3.0), 1.0);
    }

    #[test]
    fn cauchy_cdf() {
        // df = 1 is the Cauchy distribution.
        for &t in &[-3.0, -0.5, 0.0, 1.0, 2.0, 10.0] {
            let exact = 0.5 + f64::atan(t) / std::f64::consts::PI;
            assert!((student_t_cdf(t, 1.0) - exact).abs() < 1e-13);
        }
    }

    proptest! {
        #[test]
        fn antisymmetric(ma in -10.0f64..10.0, mb in -10.0f64..10.0, sa in 0.01f64..5.0, sb in 0.01f64..5.0, na in 2usize..100, nb in 2usize..100) {
            let a = summary(na, ma, sa);
            let b = summary(nb, mb, sb);
            let ab = welch_t_test(&a, &b, 0.05).unwrap();
            let ba = welch_t_test(&b, &a, 0.05).unwrap();
            prop_assert_eq!(ab.t_statistic, -ba.t_statistic);
            prop_assert_eq!(ab.p_value, ba.p_value);
            prop_assert!((0.0..=1.0).contains(&ab.p_value));
            prop_assert_eq!(ab.significant, ab.p_value < 0.05);
        }

        #[test]
        fn p_decreases_with_gap(d1 in 0.0f64..3.0, extra in 0.01f64..3.0, s in 0.5f64..2.0, n in 3usize..50) {
            let base = summary(n, 0.0, s);
            let p1 = welch_t_test(&summary(n, d1, s), &base, 0.05).unwrap().p_value;
            let p2 = welch_t_test(&summary(n, d1 + extra, s), &base, 0.05).unwrap().p_value;
            prop_assert!(p2 <= p1);
        }
    }
}
