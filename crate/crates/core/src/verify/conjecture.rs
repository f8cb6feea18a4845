//! Monte Carlo estimate of `k P(exists j in [2, k]: X_j + S_j sqrt(k^(2/j) - 1) < mu - eps)`
//! where `X_j`, `S_j` are the prefix mean and biased standard deviation of
//! `k` i.i.d. `N(mu, sigma^2)` draws. The ratio grows without bound in `k`.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::{chunks, Estimate};
use crate::error::{invalid, Result};
use crate::rng::{domain_id, substream, Stream};
use crate::stats::ArmStatistics;

#[derive(Debug, Clone, PartialEq)]
pub struct ConjectureCase {
    pub mu: f64,
    pub sigma_sq: f64,
    pub epsilon: f64,
    pub k_grid: Vec<u64>,
    pub paths: u64,
}

impl ConjectureCase {
    pub fn new(mu: f64, sigma_sq: f64, epsilon: f64, k_grid: Vec<u64>, paths: u64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(invalid("mu", "must be finite"));
        }
        if !(sigma_sq.is_finite() && sigma_sq > 0.0) {
            return Err(invalid(
                "sigma_sq",
                format!("must be finite and > 0, got {sigma_sq}"),
            ));
        }
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(invalid(
                "epsilon",
                format!("must be finite and > 0, got {epsilon}"),
            ));
        }
        if k_grid.is_empty() {
            return Err(invalid("k_grid", "must not be empty"));
        }
        if k_grid[0] < 3 {
            return Err(invalid("k_grid", "entries must be >= 3"));
        }
        if k_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("k_grid", "must be strictly increasing"));
        }
        if paths < 1000 {
            return Err(invalid("paths", format!("must be >= 1000, got {paths}")));
        }
        Ok(Self {
            mu,
            sigma_sq,
            epsilon,
            k_grid,
            paths,
        })
    }

    /// `mu = 0`, `sigma^2 = 1`, `eps = 0.5`, `k` in `{10, 100, 1000, 10000}`.
    pub fn standard(paths: u64) -> Self {
        Self::new(0.0, 1.0, 0.5, vec![10, 100, 1_000, 10_000], paths).expect("valid defaults")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioPoint {
    pub k: u64,
    pub probability: Estimate,
    /// `k` times the event frequency.
    pub ratio: f64,
    pub ratio_se: f64,
}

/// `c[j] = sqrt(k^(2/j) - 1)` for `j in 0..=k`; entries below 2 are unused.
fn inflations(k: u64) -> Vec<f64> {
    let ln_k = (k as f64).ln();
    (0..=k)
        .map(|j| {
            if j < 2 {
                0.0
            } else {
                (2.0 * ln_k / j as f64).exp_m1().sqrt()
            }
        })
        .collect()
}

/// Draws one path of length `c.len() - 1`, stopping at the first `j` where the
/// event occurs.
fn path_hits(c: &[f64], mu: f64, sd: f64, eps: f64, rng: &mut Stream) -> bool {
    let limit = mu - eps;
    let mut stats = ArmStatistics::new();
    for (j, &cj) in c.iter().enumerate().skip(1) {
        let z: f64 = rng.sample(StandardNormal);
        stats.update(mu + sd * z).expect("finite draw");
        if j >= 2 && stats.mean() < limit {
            let s = (stats.m2() / j as f64).sqrt();
            if stats.mean() + s * cj < limit {
                return true;
            }
        }
    }
    false
}

fn stream_domain(k: u64) -> u64 {
    domain_id(&format!("conjecture:k={k}"))
}

/// Ratio estimates for each `k` in the grid. The draws for a given `k` depend
/// only on `(seed, k)`, so cases differing by an affine map are coupled.
pub fn conjecture_ratio(case: &ConjectureCase, seed: u64) -> Vec<RatioPoint> {
    let sd = case.sigma_sq.sqrt();
    case.k_grid
        .iter()
        .map(|&k| {
            let c = inflations(k);
            let domain = stream_domain(k);
            let hits: u64 = chunks(case.paths)
                .map(|(i, n)| {
                    let mut rng = substream(seed, domain, i);
                    (0..n)
                        .filter(|_| path_hits(&c, case.mu, sd, case.epsilon, &mut rng))
                        .count() as u64
                })
                .sum();
            let probability = Estimate::from_counts(hits, case.paths);
            RatioPoint {
                k,
                probability,
                ratio: k as f64 * probability.value,
                ratio_se: k as f64 * probability.se,
            }
        })
        .collect()
}

/// Frequency of the single-`j` event `X_j + S_j sqrt(k^(2/j) - 1) < mu - eps`.
pub fn single_j_probability(
    mu: f64,
    sigma_sq: f64,
    epsilon: f64,
    j: u64,
    k: u64,
    paths: u64,
    seed: u64,
) -> Result<Estimate> {
    if j < 2 || j > k {
        return Err(invalid(
            "j",
            format!("must lie in [2, k], got j = {j}, k = {k}"),
        ));
    }
    let sd = sigma_sq.sqrt();
    let cj = (2.0 * (k as f64).ln() / j as f64).exp_m1().sqrt();
    let limit = mu - epsilon;
    let domain = domain_id(&format!("conjecture-single:j={j}:k={k}"));
    let hits: u64 = chunks(paths)
        .map(|(i, n)| {
            let mut rng = substream(seed, domain, i);
            (0..n)
                .filter(|_| {
                    let mut stats = ArmStatistics::new();
                    for _ in 0..j {
                        let z: f64 = rng.sample(StandardNormal);
                        stats.update(mu + sd * z).expect("finite draw");
                    }
                    let s = (stats.m2() / j as f64).sqrt();
                    stats.mean() + s * cj < limit
                })
                .count() as u64
        })
        .sum();
    Ok(Estimate::from_counts(hits, paths))
}

/// True when every consecutive ratio rises by more than `z` combined SEs.
pub fn strictly_increasing(points: &[RatioPoint], z: f64) -> bool {
    points.windows(2).all(|w| {
        let se = (w[0].ratio_se.powi(2) + w[1].ratio_se.powi(2)).sqrt();
        w[1].ratio - w[0].ratio > z * se
    })
}

/// Combined SE of a difference of two independent ratio estimates.
pub fn combined_se(a: &RatioPoint, b: &RatioPoint) -> f64 {
    (a.ratio_se.powi(2) + b.ratio_se.powi(2)).sqrt()
}
