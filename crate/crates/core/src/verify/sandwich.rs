//! Two-sided bound on `P(delta + sqrt(U) sqrt(k^(2/p) - 1) < Z)` for
//! independent `Z ~ N(0,1)` and `U ~ chi^2_d`:
//!
//! ```text
//! 0.5 P(Z^2/4 >= U >= delta^2) k^(-d/p)
//!     <= P(...) <=
//! exp(-(1 + delta^2)/2) p / (2 delta^2 sqrt(d)) * k^((1-d)/p) / ln k
//! ```

use rand::Rng;
use rand_distr::{ChiSquared, StandardNormal};
use rayon::prelude::*;
use statrs::distribution::{ChiSquared as ChiSquaredDist, Continuous};
use statrs::function::erf::erfc;

use super::{chunks, Estimate};
use crate::error::{invalid, Result};
use crate::quad;
use crate::rng::{domain_id, substream};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichCase {
    pub delta: f64,
    pub p: f64,
    pub d: u32,
    pub k: u64,
    pub mc_samples: u64,
}

impl SandwichCase {
    pub fn new(delta: f64, p: f64, d: u32, k: u64, mc_samples: u64) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(invalid(
                "delta",
                format!("must be finite and > 0, got {delta}"),
            ));
        }
        if !(p.is_finite() && p > 0.0) {
            return Err(invalid("p", format!("must be finite and > 0, got {p}")));
        }
        if d < 2 {
            return Err(invalid("d", format!("must be >= 2, got {d}")));
        }
        if k < 1 {
            return Err(invalid("k", "must be >= 1"));
        }
        if mc_samples < 10_000 {
            return Err(invalid(
                "mc_samples",
                format!("must be >= 10^4, got {mc_samples}"),
            ));
        }
        Ok(Self {
            delta,
            p,
            d,
            k,
            mc_samples,
        })
    }

    /// `sqrt(k^(2/p) - 1)`.
    pub fn inflation(&self) -> f64 {
        (2.0 * (self.k as f64).ln() / self.p).exp_m1().sqrt()
    }

    fn label(&self) -> String {
        format!("tail:{}:{}:{}:{}", self.delta, self.p, self.d, self.k)
    }
}

/// Lower bound with the standard error carried over from its inner probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBound {
    pub value: f64,
    pub se: f64,
    pub inner_probability: f64,
}

/// `P(Z^2/4 >= U >= delta^2)` as `int_{delta^2}^inf f_d(u) erfc(sqrt(2u)) du`.
///
/// The integrand decays like `exp(-5u/2)`, so the range is cut 60 units past
/// the lower limit.
pub fn inner_probability(delta: f64, d: u32) -> Result<f64> {
    if d < 1 {
        return Err(invalid("d", "must be >= 1"));
    }
    let chi = ChiSquaredDist::new(d as f64).map_err(|e| invalid("d", e.to_string()))?;
    let lo = delta * delta;
    Ok(quad::integrate(
        |u| {
            if u <= 0.0 {
                0.0
            } else {
                chi.pdf(u) * erfc((2.0 * u).sqrt())
            }
        },
        lo,
        lo + 60.0,
        1e-17,
    ))
}

/// `0.5 P(Z^2/4 >= U >= delta^2) k^(-d/p)`; the inner probability is a
/// quadrature value so its standard error is zero.
pub fn prop1_lower(case: &SandwichCase) -> Result<LowerBound> {
    let inner = inner_probability(case.delta, case.d)?;
    let scale = (case.k as f64).powf(-(case.d as f64) / case.p);
    Ok(LowerBound {
        value: 0.5 * inner * scale,
        se: 0.0,
        inner_probability: inner,
    })
}

/// `exp(-(1 + delta^2)/2) p / (2 delta^2 sqrt(d)) * k^((1-d)/p) / ln k`; needs `k >= 2`.
pub fn prop1_upper(case: &SandwichCase) -> Result<f64> {
    if case.k < 2 {
        return Err(invalid("k", "upper bound divides by ln k and needs k >= 2"));
    }
    let k = case.k as f64;
    let d = case.d as f64;
    let delta_sq = case.delta * case.delta;
    Ok(
        (-(1.0 + delta_sq) / 2.0).exp() * case.p / (2.0 * delta_sq * d.sqrt())
            * k.powf((1.0 - d) / case.p)
            / k.ln(),
    )
}

fn tail_hits<R: Rng>(
    case: &SandwichCase,
    c: f64,
    chi: &ChiSquared<f64>,
    n: u64,
    rng: &mut R,
) -> u64 {
    let mut hits = 0;
    for _ in 0..n {
        let z: f64 = rng.sample(StandardNormal);
        let u: f64 = rng.sample(chi);
        if case.delta + u.sqrt() * c < z {
            hits += 1;
        }
    }
    hits
}

/// Monte Carlo estimate of the tail probability from `case.mc_samples`
/// draws. Chunk `i` of each case reads `substream(seed, domain_id(label), i)`.
pub fn mc_tail_probability(case: &SandwichCase, seed: u64) -> Estimate {
    let c = case.inflation();
    let chi = ChiSquared::new(case.d as f64).expect("d >= 2");
    let domain = domain_id(&case.label());
    let hits: u64 = chunks(case.mc_samples)
        .map(|(i, n)| tail_hits(case, c, &chi, n, &mut substream(seed, domain, i)))
        .sum();
    Estimate::from_counts(hits, case.mc_samples)
}

/// Monte Carlo cross-check of [`inner_probability`].
pub fn mc_inner_probability(delta: f64, d: u32, samples: u64, seed: u64) -> Estimate {
    let chi = ChiSquared::new(d as f64).expect("d >= 1");
    let domain = domain_id(&format!("inner:{delta}:{d}"));
    let lo = delta * delta;
    let hits: u64 = chunks(samples)
        .map(|(i, n)| {
            let mut rng = substream(seed, domain, i);
            (0..n)
                .filter(|_| {
                    let z: f64 = rng.sample(StandardNormal);
                    let u: f64 = rng.sample(chi);
                    z * z / 4.0 >= u && u >= lo
                })
                .count() as u64
        })
        .sum();
    Estimate::from_counts(hits, samples)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SandwichOutcome {
    pub case: SandwichCase,
    pub estimate: Estimate,
    pub lower: LowerBound,
    pub upper: f64,
    /// Estimate within `[lower - 3 SE, upper + 3 SE]`, SE combining both sides.
    pub inside: bool,
}

pub fn check_sandwich(case: &SandwichCase, seed: u64) -> Result<SandwichOutcome> {
    let lower = prop1_lower(case)?;
    let upper = prop1_upper(case)?;
    let estimate = mc_tail_probability(case, seed);
    let se = (estimate.se.powi(2) + lower.se.powi(2)).sqrt();
    let inside = estimate.value >= lower.value - 3.0 * se && estimate.value <= upper + 3.0 * se;
    Ok(SandwichOutcome {
        case: *case,
        estimate,
        lower,
        upper,
        inside,
    })
}

/// `delta x p x d x k` over `{0.5,1,2} x {3,5,10} x {2,4,9} x {10,100,1000}`.
pub fn default_grid(mc_samples: u64) -> Vec<SandwichCase> {
    let mut out = Vec::with_capacity(81);
    for delta in [0.5, 1.0, 2.0] {
        for p in [3.0, 5.0, 10.0] {
            for d in [2, 4, 9] {
                for k in [10, 100, 1000] {
                    out.push(SandwichCase {
                        delta,
                        p,
                        d,
                        k,
                        mc_samples,
                    });
                }
            }
        }
    }
    out
}

/// Runs [`check_sandwich`] over `cases` in order.
pub fn run_grid(cases: &[SandwichCase], seed: u64) -> Result<Vec<SandwichOutcome>> {
    cases.iter().map(|c| check_sandwich(c, seed)).collect()
}
