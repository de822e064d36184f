//! Independent oracles for the numerical kernels.

use deqt::stats::student_t_cdf;
use deqt::{histogram_entropy, HistogramSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Brute-force histogram entropy: count each bin against its explicit edges,
/// take the discrete entropy of the bin frequencies, and add ln(width).
fn brute_force_entropy(values: &[f64], n_bins: usize) -> f64 {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / n_bins as f64;
    let mut discrete = 0.0;
    for i in 0..n_bins {
        let left = lo + i as f64 * width;
        let right = lo + (i + 1) as f64 * width;
        let count = values
            .iter()
            .filter(|&&v| v >= left && (v < right || (i == n_bins - 1 && v <= hi)))
            .count();
        if count > 0 {
            let p = count as f64 / values.len() as f64;
            discrete -= p * p.ln();
        }
    }
    discrete + width.ln()
}

fn normal_samples(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let u1: f64 = 1.0 - rng.random::<f64>();
            let u2: f64 = rng.random();
            (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
        })
        .collect()
}

#[test]
fn histogram_matches_brute_force() {
    for seed in 0..5 {
        let v = normal_samples(1000, seed);
        for bins in [10, 37, 100] {
            let spec = HistogramSpec {
                n_bins: bins,
                ..Default::default()
            };
            let fast = histogram_entropy(&v, &spec).unwrap();
            let slow = brute_force_entropy(&v, bins);
            assert!(
                (fast - slow).abs() < 1e-12,
                "seed {seed} bins {bins}: {fast} vs {slow}"
            );
        }
    }
}

#[test]
fn normal_sample_entropy_near_closed_form() {
    // h(N(0, 1)) = 0.5 * ln(2 pi e)
    let exact = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln();
    let v = normal_samples(1000, 42);
    let est = histogram_entropy(&v, &HistogramSpec::default()).unwrap();
    assert!((est - exact).abs() < 0.15, "{est} vs {exact}");
}

/// Student-t CDF by quadrature. With `x = tan(theta)` the unnormalized density
/// becomes a bounded integrand on (-pi/2, pi/2); normalizing by its total
/// integral avoids any gamma-function evaluation.
fn quadrature_t_cdf(t: f64, df: f64) -> f64 {
    let g = |theta: f64| {
        let x = theta.tan();
        let c = theta.cos();
        (1.0 + x * x / df).powf(-(df + 1.0) / 2.0) / (c * c)
    };
    let simpson = |a: f64, b: f64, n: usize| {
        let h = (b - a) / n as f64;
        let mut s = g(a) + g(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * g(a + i as f64 * h);
        }
        s * h / 3.0
    };
    // Stay just inside the open interval; the integrand vanishes or is
    // bounded at the ends for df >= 1.
    let edge = std::f64::consts::FRAC_PI_2 - 1e-9;
    let total = simpson(-edge, edge, 200_000);
    let part = simpson(-edge, t.atan(), 200_000);
    part / total
}

#[test]
fn student_t_cdf_matches_quadrature() {
    for df in [1.0, 5.0, 18.0, 58.0] {
        for t in [0.0, 1.0, 2.0, 3.0] {
            let fast = student_t_cdf(t, df);
            let slow = quadrature_t_cdf(t, df);
            assert!(
                (fast - slow).abs() < 1e-6,
                "df {df} t {t}: {fast} vs {slow}"
            );
        }
    }
}
