//! Test-only oracles that do not share code paths with the library.

#![allow(dead_code)]

use quadrature::double_exponential::integrate;

/// Unnormalised marginal posterior of the mean, obtained by integrating the
/// joint posterior `(sigma^2)^(-1-alpha) * likelihood` over `v = ln sigma^2`.
///
/// With `c = alpha + k/2` and `A = k (s^2 + (mu - xbar)^2) / 2`, the integrand
/// is `exp(-c v - A e^-v)`. It is evaluated relative to `exp(l_ref)` on a window around its mode
/// `v* = ln(A / c)`.
fn marginal_unnormalised(mu: f64, k: u64, xbar: f64, s_biased: f64, alpha: f64, l_ref: f64) -> f64 {
    let kf = k as f64;
    let c = alpha + kf / 2.0;
    let a = kf * (s_biased * s_biased + (mu - xbar).powi(2)) / 2.0;
    let v_star = (a / c).ln();
    let f = |v: f64| (-c * v - a * (-v).exp() - l_ref).exp();
    // the log-integrand falls at least 80 below its peak outside this window
    let lo = v_star - (1.0 + 80.0 / c).ln() - 0.5;
    let hi = v_star + 80.0 / c + 2.0;
    let width = 1.0 / c.sqrt();
    let cuts = [lo, v_star - 3.0 * width, v_star, v_star + 3.0 * width, hi];
    cuts.windows(2)
        .map(|w| integrate(f, w[0], w[1], 1e-16).integral)
        .sum()
}

/// Numerically integrated posterior density of the mean on `grid`.
pub fn integrated_posterior_density(
    grid: &[f64],
    k: u64,
    xbar: f64,
    s_biased: f64,
    alpha: f64,
) -> Vec<f64> {
    let kf = k as f64;
    let c = alpha + kf / 2.0;
    let a0 = kf * s_biased * s_biased / 2.0;
    // log of the integrand's peak at mu = xbar
    let l_ref = -c * (a0 / c).ln() - c;
    let g = |mu: f64| marginal_unnormalised(mu, k, xbar, s_biased, alpha, l_ref);
    // mu = xbar + s tan(theta) maps the real line onto (-pi/2, pi/2)
    let half_pi = std::f64::consts::FRAC_PI_2;
    let density = |theta: f64| {
        let cos = theta.cos();
        if cos <= 0.0 {
            return 0.0;
        }
        let v = g(xbar + s_biased * theta.tan()) * s_biased / (cos * cos);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let cuts = [-half_pi, -1.0, -0.3, -0.1, 0.0, 0.1, 0.3, 1.0, half_pi];
    let norm: f64 = cuts
        .windows(2)
        .map(|w| integrate(density, w[0], w[1], 1e-15).integral)
        .sum();
    grid.iter().map(|&mu| g(mu) / norm).collect()
}

/// Two-sided Kolmogorov-Smirnov distance between `samples` and `cdf`.
pub fn ks_distance(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// `sum_i 2 delta_i / ln(1 + delta_i^2 / sigma_i^2)` over arms with positive
/// gap, with the logarithm taken directly rather than through `ln_1p`.
pub fn m_bk_oracle(means: &[f64], variances: &[f64]) -> (f64, Vec<f64>) {
    let best = means.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let terms: Vec<f64> = means
        .iter()
        .zip(variances)
        .filter(|(m, _)| **m < best)
        .map(|(m, v)| {
            let d = best - m;
            2.0 * d / (1.0 + d * d / v).ln()
        })
        .collect();
    (terms.iter().sum(), terms)
}
