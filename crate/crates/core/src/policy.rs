//! Allocation policies for normal bandits with unknown means and variances.
//!
//! Index policies score each arm from its own statistics and the number of
//! pulls made so far, then play the highest score. All ties go to the lowest
//! arm index. Before any index is consulted each policy pulls every arm a
//! fixed number of times in round-robin order.

use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, StudentT};
use statrs::distribution::{Continuous, ContinuousCDF, StudentsT};

use crate::error::{invalid, Error, Result};
use crate::stats::ArmStatistics;

#[derive(Debug, Clone, PartialEq)]
pub enum PolicySpec {
    /// Inflated sample mean with exponent `2 / (k - 2)`; three initial pulls per arm.
    Chk,
    /// Inflated sample mean with exponent `2 / k`; two initial pulls per arm.
    Bk,
    /// UCB1-NORMAL: forced exploration below `ceil(8 ln n)` pulls, then
    /// `mean + 4 S sqrt(ln n / k)` with the unbiased `S`.
    Acf,
    /// `mean + sigma_i sqrt(2 ln n / k)` with the true standard deviations.
    KnownVariance { sigmas: Vec<f64> },
    /// Posterior sampling under the prior `(sigma^2)^(-1 - alpha)`, `alpha < 0`.
    Thompson { alpha: f64 },
    /// Always plays the highest sample mean.
    Greedy,
}

impl PolicySpec {
    pub fn validate(&self, n_arms: usize) -> Result<()> {
        match self {
            PolicySpec::Thompson { alpha } => {
                if !(alpha.is_finite() && *alpha < 0.0) {
                    return Err(Error::InvalidPolicy(format!(
                        "thompson requires a finite alpha < 0, got {alpha}"
                    )));
                }
            }
            PolicySpec::KnownVariance { sigmas } => {
                if sigmas.len() != n_arms {
                    return Err(Error::InvalidPolicy(format!(
                        "known-variance needs {n_arms} sigmas, got {}",
                        sigmas.len()
                    )));
                }
                if let Some(i) = sigmas.iter().position(|s| !(s.is_finite() && *s > 0.0)) {
                    return Err(Error::InvalidPolicy(format!(
                        "known_sigmas[{i}] = {} must be finite and > 0",
                        sigmas[i]
                    )));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Pulls per arm before indices are used.
    pub fn init_pulls(&self) -> u64 {
        match self {
            PolicySpec::Chk => 3,
            PolicySpec::Bk | PolicySpec::Acf => 2,
            PolicySpec::Thompson { alpha } => thompson_init_pulls(*alpha),
            PolicySpec::KnownVariance { .. } | PolicySpec::Greedy => 1,
        }
    }

    /// Canonical label. Stream derivation hashes it, so equal specs share streams.
    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicySpec::Chk => f.write_str("chk"),
            PolicySpec::Bk => f.write_str("bk"),
            PolicySpec::Acf => f.write_str("acf"),
            PolicySpec::Greedy => f.write_str("greedy"),
            PolicySpec::Thompson { alpha } => write!(f, "ts(alpha={alpha})"),
            PolicySpec::KnownVariance { sigmas } => {
                f.write_str("known-var(sigmas=")?;
                for (i, s) in sigmas.iter().enumerate() {
                    if i > 0 {
                        f.write_str(";")?;
                    }
                    write!(f, "{s}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// `max(2, 3 - floor(2 alpha))`.
pub fn thompson_init_pulls(alpha: f64) -> u64 {
    let v = 3.0 - (2.0 * alpha).floor();
    v.max(2.0) as u64
}

/// Per-arm statistics plus the total pull count of one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyState {
    arm_stats: Vec<ArmStatistics>,
    t: u64,
}

impl PolicyState {
    pub fn new(n_arms: usize) -> Self {
        Self {
            arm_stats: vec![ArmStatistics::new(); n_arms],
            t: 0,
        }
    }

    pub fn from_stats(arm_stats: Vec<ArmStatistics>) -> Self {
        let t = arm_stats.iter().map(ArmStatistics::count).sum();
        Self { arm_stats, t }
    }

    pub fn record(&mut self, arm: usize, reward: f64) -> Result<()> {
        self.arm_stats[arm].update(reward)?;
        self.t += 1;
        Ok(())
    }

    pub fn arm_stats(&self) -> &[ArmStatistics] {
        &self.arm_stats
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn counts(&self) -> impl Iterator<Item = u64> + '_ {
        self.arm_stats.iter().map(ArmStatistics::count)
    }

    pub fn n_arms(&self) -> usize {
        self.arm_stats.len()
    }
}

fn check_time(n: f64) -> Result<f64> {
    if n.is_finite() && n >= 1.0 {
        Ok(n.ln())
    } else {
        Err(invalid("n", format!("must be finite and >= 1, got {n}")))
    }
}

fn check_dispersion(name: &'static str, s: f64) -> Result<()> {
    if s.is_finite() && s >= 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite and >= 0, got {s}")))
    }
}

fn saturate(x: f64) -> f64 {
    if x == f64::INFINITY {
        f64::MAX
    } else {
        x
    }
}

/// `n^(2/m) - 1` evaluated as `expm1(2 ln n / m)`.
fn inflation(ln_n: f64, m: f64) -> f64 {
    saturate((2.0 * ln_n / m).exp_m1())
}

fn chk_value(ln_n: f64, k: u64, mean: f64, s: f64) -> f64 {
    saturate(mean + s * inflation(ln_n, (k - 2) as f64).sqrt())
}

fn bk_value(ln_n: f64, k: u64, mean: f64, s: f64) -> f64 {
    saturate(mean + s * inflation(ln_n, k as f64).sqrt())
}

fn acf_value(ln_n: f64, k: u64, mean: f64, s: f64) -> f64 {
    mean + 4.0 * s * (ln_n / k as f64).sqrt()
}

fn known_var_value(ln_n: f64, k: u64, mean: f64, sigma: f64) -> f64 {
    mean + sigma * (2.0 * ln_n / k as f64).sqrt()
}

/// `mean + s sqrt(n^(2/(k-2)) - 1)`.
pub fn index_chk(n: f64, k: u64, mean: f64, s: f64) -> Result<f64> {
    if k < 3 {
        return Err(Error::TooFewSamples { min: 3, actual: k });
    }
    let ln_n = check_time(n)?;
    check_dispersion("s", s)?;
    Ok(chk_value(ln_n, k, mean, s))
}

/// `mean + s sqrt(n^(2/k) - 1)`.
pub fn index_bk(n: f64, k: u64, mean: f64, s: f64) -> Result<f64> {
    if k < 2 {
        return Err(Error::TooFewSamples { min: 2, actual: k });
    }
    let ln_n = check_time(n)?;
    check_dispersion("s", s)?;
    Ok(bk_value(ln_n, k, mean, s))
}

/// `mean + 4 s sqrt(ln n / k)`, with `s` the unbiased standard deviation.
pub fn index_acf(n: f64, k: u64, mean: f64, s_unbiased: f64) -> Result<f64> {
    if k < 2 {
        return Err(Error::TooFewSamples { min: 2, actual: k });
    }
    let ln_n = check_time(n)?;
    check_dispersion("s_unbiased", s_unbiased)?;
    Ok(acf_value(ln_n, k, mean, s_unbiased))
}

/// `mean + sigma sqrt(2 ln n / k)`.
pub fn index_known_var(n: f64, k: u64, mean: f64, sigma: f64) -> Result<f64> {
    if k < 1 {
        return Err(Error::TooFewSamples { min: 1, actual: k });
    }
    let ln_n = check_time(n)?;
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(invalid(
            "sigma",
            format!("must be finite and > 0, got {sigma}"),
        ));
    }
    Ok(known_var_value(ln_n, k, mean, sigma))
}

/// Arm forced by the exploration rule at time `n`: the least-sampled arm
/// among those strictly below `ceil(8 ln n)` pulls. Arms exactly at the
/// threshold are left to the index step.
pub fn acf_forced_arm(n: u64, counts: &[u64]) -> Option<usize> {
    if n == 0 {
        return None;
    }
    let threshold = (8.0 * (n as f64).ln()).ceil() as u64;
    counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c < threshold)
        .min_by_key(|(i, &c)| (c, *i))
        .map(|(i, _)| i)
}

/// Marginal posterior of an arm mean after `k` samples with sample mean
/// `mean` and biased standard deviation `s_biased`, under the prior
/// `(sigma^2)^(-1 - alpha)`: a location-scale Student t with
/// `k + 2 alpha - 1` degrees of freedom, location `mean` and scale
/// `s_biased / sqrt(dof)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TsPosterior {
    pub location: f64,
    pub scale: f64,
    pub dof: f64,
}

impl TsPosterior {
    pub fn new(k: u64, mean: f64, s_biased: f64, alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha < 0.0) {
            return Err(invalid(
                "alpha",
                format!("must be finite and < 0, got {alpha}"),
            ));
        }
        let min = thompson_init_pulls(alpha);
        if k < min {
            return Err(Error::TooFewSamples { min, actual: k });
        }
        check_dispersion("s_biased", s_biased)?;
        let dof = k as f64 + 2.0 * alpha - 1.0;
        if dof <= 0.0 {
            return Err(invalid("alpha", format!("degrees of freedom {dof} <= 0")));
        }
        Ok(Self {
            location: mean,
            scale: s_biased / dof.sqrt(),
            dof,
        })
    }

    fn dist(&self) -> Option<StudentsT> {
        StudentsT::new(self.location, self.scale, self.dof).ok()
    }

    /// Density; `None` for a degenerate (zero-scale) posterior.
    pub fn pdf(&self, mu: f64) -> Option<f64> {
        self.dist().map(|d| d.pdf(mu))
    }

    pub fn cdf(&self, mu: f64) -> Option<f64> {
        self.dist().map(|d| d.cdf(mu))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let t: f64 = StudentT::new(self.dof)
            .expect("dof checked positive")
            .sample(rng);
        self.location + self.scale * t
    }
}

/// One posterior draw for an arm mean.
pub fn ts_sample<R: Rng + ?Sized>(
    k: u64,
    mean: f64,
    s_biased: f64,
    alpha: f64,
    noise: &mut R,
) -> Result<f64> {
    Ok(TsPosterior::new(k, mean, s_biased, alpha)?.sample(noise))
}

/// First index of the maximum.
fn argmax(scores: impl Iterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (i, s) in scores.enumerate() {
        if i == 0 || s > best_score {
            best = i;
            best_score = s;
        }
    }
    best
}

/// Arm to pull next.
///
/// During initialization this is the least-sampled arm, which reproduces
/// round-robin order. Afterwards indices are evaluated at `n = t`, the
/// number of pulls so far. The spec is assumed validated for this state's
/// arm count.
pub fn select<R: Rng + ?Sized>(spec: &PolicySpec, state: &PolicyState, noise: &mut R) -> usize {
    let stats = state.arm_stats();
    let init = spec.init_pulls();
    if let Some((arm, _)) = stats
        .iter()
        .enumerate()
        .filter(|(_, s)| s.count() < init)
        .min_by_key(|(i, s)| (s.count(), *i))
    {
        return arm;
    }

    let t = state.t();
    let ln_n = (t as f64).ln();
    match spec {
        PolicySpec::Chk => argmax(
            stats
                .iter()
                .map(|s| chk_value(ln_n, s.count(), s.mean(), s.biased_sd().unwrap_or(0.0))),
        ),
        PolicySpec::Bk => argmax(
            stats
                .iter()
                .map(|s| bk_value(ln_n, s.count(), s.mean(), s.biased_sd().unwrap_or(0.0))),
        ),
        PolicySpec::Acf => {
            let counts: Vec<u64> = state.counts().collect();
            if let Some(arm) = acf_forced_arm(t, &counts) {
                return arm;
            }
            argmax(
                stats
                    .iter()
                    .map(|s| acf_value(ln_n, s.count(), s.mean(), s.unbiased_sd().unwrap_or(0.0))),
            )
        }
        PolicySpec::KnownVariance { sigmas } => argmax(
            stats
                .iter()
                .zip(sigmas)
                .map(|(s, &sigma)| known_var_value(ln_n, s.count(), s.mean(), sigma)),
        ),
        PolicySpec::Thompson { alpha } => argmax(stats.iter().map(|s| {
            ts_sample(
                s.count(),
                s.mean(),
                s.biased_sd().unwrap_or(0.0),
                *alpha,
                noise,
            )
            .expect("initialization guarantees enough samples")
        })),
        PolicySpec::Greedy => argmax(stats.iter().map(ArmStatistics::mean)),
    }
}
