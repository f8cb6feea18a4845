//! Closed-form regret bounds.
//!
//! Sums run over strictly suboptimal arms unless noted; an instance whose
//! arms are all optimal gets zero everywhere.

use std::f64::consts::{E, PI};

use crate::error::{invalid, Result};
use crate::instance::BanditInstance;

/// `sqrt(pi / (2e))`.
fn tail_constant() -> f64 {
    (PI / (2.0 * E)).sqrt()
}

/// Normal-family divergence gap `0.5 ln(1 + delta^2 / sigma^2)`.
pub fn kl_gap(delta: f64, sigma_sq: f64) -> f64 {
    0.5 * (delta * delta / sigma_sq).ln_1p()
}

/// One arm's contribution `2 delta / ln(1 + delta^2 / sigma^2)` to the lower-bound constant.
pub fn m_bk_term(delta: f64, sigma_sq: f64) -> f64 {
    2.0 * delta / (delta * delta / sigma_sq).ln_1p()
}

/// Asymptotic lower-bound constant on `regret / ln n` for uniformly fast convergent policies.
pub fn m_bk(instance: &BanditInstance) -> f64 {
    gaps(instance).map(|(d, v)| m_bk_term(d, v)).sum()
}

fn gaps(instance: &BanditInstance) -> impl Iterator<Item = (f64, f64)> + '_ {
    instance
        .suboptimal_arms()
        .map(|i| (instance.summary().deltas[i], instance.variances()[i]))
}

/// Logarithmic coefficient of the UCB1-NORMAL bound:
/// `256 sum sigma_i^2 / delta_i + 8 sum delta_i`.
pub fn acf_log_coefficient(instance: &BanditInstance) -> f64 {
    gaps(instance).map(|(d, v)| 256.0 * v / d + 8.0 * d).sum()
}

/// Constant term `(1 + pi^2 / 2) sum delta_i`.
pub fn acf_constant(instance: &BanditInstance) -> f64 {
    (1.0 + PI * PI / 2.0) * instance.summary().deltas.iter().sum::<f64>()
}

/// `M_ACF ln n + C_ACF`.
pub fn acf_upper(instance: &BanditInstance, n: f64) -> Result<f64> {
    if !(n.is_finite() && n >= 1.0) {
        return Err(invalid("n", format!("must be finite and >= 1, got {n}")));
    }
    Ok(acf_log_coefficient(instance) * n.ln() + acf_constant(instance))
}

/// Finite-horizon bound for the `2/(k-2)` index policy at time `n` with slack `eps`.
///
/// Per suboptimal arm the bracket is
/// `2 ln n / ln(1 + G (1-eps)^2/(1+eps)) + sqrt(pi/2e) 8 sigma_*^3 ln ln n / (delta^3 eps^3)
///  + 8/eps^2 + 8 sigma^2/(delta^2 eps^2) + 4`, with `G = delta^2/sigma^2`, multiplied by `delta`.
/// The bound is stated for `n >= 3N`; only `n >= 3` is enforced here.
pub fn chk_finite_bound(instance: &BanditInstance, n: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid("eps", format!("must lie in (0, 1), got {eps}")));
    }
    if !(n.is_finite() && n >= 3.0) {
        return Err(invalid("n", format!("must be finite and >= 3, got {n}")));
    }
    let ln_n = n.ln();
    let lnln_n = ln_n.ln();
    let sigma_star_cubed = instance.summary().sigma_star_sq.powf(1.5);
    let shrink = (1.0 - eps).powi(2) / (1.0 + eps);
    Ok(gaps(instance)
        .map(|(d, v)| {
            let g = d * d / v;
            let bracket = 2.0 * ln_n / (g * shrink).ln_1p()
                + tail_constant() * 8.0 * sigma_star_cubed / (d.powi(3) * eps.powi(3)) * lnln_n
                + 8.0 / (eps * eps)
                + 8.0 * v / (d * d * eps * eps)
                + 4.0;
            bracket * d
        })
        .sum())
}

/// Slack schedule `0.5 (ln n)^(-1/4)` used for the remainder bound.
pub fn theorem3_epsilon(n: f64) -> f64 {
    0.5 * n.ln().powf(-0.25)
}

/// Coefficients of the remainder bound
/// `M0 ln n + M1 (ln n)^(3/4) ln ln n + M2 (ln n)^(3/4) + M3 (ln n)^(1/2) + M4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemainderCoefficients {
    pub m0: f64,
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
}

pub fn remainder_coefficients(instance: &BanditInstance) -> RemainderCoefficients {
    let sigma_star_cubed = instance.summary().sigma_star_sq.powf(1.5);
    let mut c = RemainderCoefficients {
        m0: m_bk(instance),
        m1: 0.0,
        m2: 0.0,
        m3: 0.0,
        m4: 0.0,
    };
    for (d, v) in gaps(instance) {
        let l = (d * d / v).ln_1p();
        c.m1 += sigma_star_cubed / (d * d);
        c.m2 += d.powi(3) / ((v + d * d) * l * l);
        c.m3 += d + v / d;
        c.m4 += d;
    }
    c.m1 *= 64.0 * tail_constant();
    c.m2 *= 10.0;
    c.m3 *= 32.0;
    c.m4 *= 4.0;
    c
}

/// Epsilon-free remainder bound, valid for `n >= 3`.
pub fn chk_remainder_bound(instance: &BanditInstance, n: f64) -> Result<f64> {
    if !(n.is_finite() && n >= 3.0) {
        return Err(invalid("n", format!("must be finite and >= 3, got {n}")));
    }
    let c = remainder_coefficients(instance);
    let l = n.ln();
    let l34 = l.powf(0.75);
    Ok(c.m0 * l + c.m1 * l34 * l.ln() + c.m2 * l34 + c.m3 * l.sqrt() + c.m4)
}

/// How the slack `eps` of the finite bound is chosen at each `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsilonSchedule {
    /// `0.5 (ln n)^(-1/4)`.
    Theorem3,
    /// `(ln n)^(1/4)`; exceeds 1 once `n > e`, where the bound is undefined.
    Remark3,
    Fixed(f64),
}

impl EpsilonSchedule {
    pub fn at(&self, n: f64) -> f64 {
        match self {
            EpsilonSchedule::Theorem3 => theorem3_epsilon(n),
            EpsilonSchedule::Remark3 => n.ln().powf(0.25),
            EpsilonSchedule::Fixed(e) => *e,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArmTerms {
    pub arm: usize,
    pub delta: f64,
    pub variance: f64,
    pub kl: f64,
    pub m_bk_term: f64,
    pub acf_log_term: f64,
}

/// Every bound over a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub times: Vec<u64>,
    pub m_bk: f64,
    pub acf_bound: Vec<f64>,
    pub epsilons: Vec<f64>,
    /// `None` where `n < 3` or the schedule leaves `(0, 1)`.
    pub chk_bound_eps: Vec<Option<f64>>,
    /// `None` where `n < 3`.
    pub chk_remainder_bound: Vec<Option<f64>>,
    pub per_arm_terms: Vec<ArmTerms>,
}

pub fn bound_report(
    instance: &BanditInstance,
    times: &[u64],
    schedule: EpsilonSchedule,
) -> Result<BoundReport> {
    let mut report = BoundReport {
        times: times.to_vec(),
        m_bk: m_bk(instance),
        acf_bound: Vec::with_capacity(times.len()),
        epsilons: Vec::with_capacity(times.len()),
        chk_bound_eps: Vec::with_capacity(times.len()),
        chk_remainder_bound: Vec::with_capacity(times.len()),
        per_arm_terms: Vec::new(),
    };
    for &t in times {
        let n = t as f64;
        let eps = schedule.at(n);
        report.acf_bound.push(acf_upper(instance, n)?);
        report.epsilons.push(eps);
        report
            .chk_bound_eps
            .push(chk_finite_bound(instance, n, eps).ok());
        report
            .chk_remainder_bound
            .push(chk_remainder_bound(instance, n).ok());
    }
    report.per_arm_terms = instance
        .suboptimal_arms()
        .map(|i| {
            let d = instance.summary().deltas[i];
            let v = instance.variances()[i];
            ArmTerms {
                arm: i,
                delta: d,
                variance: v,
                kl: kl_gap(d, v),
                m_bk_term: m_bk_term(d, v),
                acf_log_term: 256.0 * v / d + 8.0 * d,
            }
        })
        .collect();
    Ok(report)
}
