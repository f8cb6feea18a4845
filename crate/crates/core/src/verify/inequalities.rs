//! Grid checks of the analytic inequalities used in the regret bounds.

use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma;

/// Outcome of one grid check. `max_violation` is the largest signed amount by
/// which the inequality fails (negative when it holds strictly everywhere).
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub cases: usize,
    pub max_violation: f64,
    pub tolerance: f64,
    pub worst_case: String,
    pub passed: bool,
}

#[derive(Debug, Default)]
struct Tracker {
    cases: usize,
    max_violation: f64,
    worst_case: String,
    failed: bool,
}

impl Tracker {
    fn new() -> Self {
        Self {
            max_violation: f64::NEG_INFINITY,
            ..Self::default()
        }
    }

    fn record(&mut self, violation: f64, tolerance: f64, describe: impl FnOnce() -> String) {
        self.cases += 1;
        let bad = violation.is_nan() || violation > tolerance;
        if bad {
            self.failed = true;
        }
        if violation.is_nan()
            || violation > self.max_violation
            || (bad && self.worst_case.is_empty())
        {
            self.max_violation = if violation.is_nan() {
                f64::NAN
            } else {
                violation
            };
            self.worst_case = describe();
        }
    }

    fn finish(self, name: &str, tolerance: f64) -> CheckResult {
        CheckResult {
            name: name.to_string(),
            cases: self.cases,
            max_violation: self.max_violation,
            tolerance,
            worst_case: self.worst_case,
            passed: !self.failed && self.cases > 0,
        }
    }
}

/// `H_G(eps) = 1 / ln(1 + G (1 - eps)^2 / (1 + eps))`.
pub fn h(g: f64, eps: f64) -> f64 {
    1.0 / (g * (1.0 - eps).powi(2) / (1.0 + eps)).ln_1p()
}

/// Right-hand side `1/ln(1+G) + 10 G eps / ((1+G) ln(1+G)^2)`.
pub fn prop3_rhs(g: f64, eps: f64) -> f64 {
    let l = g.ln_1p();
    1.0 / l + 10.0 * g * eps / ((1.0 + g) * l * l)
}

/// `G = 10^(e/10)` for `e` in `-40..=60`, i.e. `1e-4 ..= 1e6`.
pub fn default_g_grid() -> Vec<f64> {
    (-40..=60).map(|e| 10f64.powf(e as f64 / 10.0)).collect()
}

/// `eps` in `0, 0.01, ..., 0.49`.
pub fn default_prop3_eps_grid() -> Vec<f64> {
    (0..50).map(|i| i as f64 / 100.0).collect()
}

/// `eps` in `0, 0.01, ..., 0.95`.
pub fn default_convexity_eps_grid() -> Vec<f64> {
    (0..=95).map(|i| i as f64 / 100.0).collect()
}

const PROP3_TOL: f64 = 1e-12;
const CONVEXITY_TOL: f64 = 1e-9;

/// Largest `LHS - RHS` relative to the RHS over the grids; passes when it
/// does not exceed `1e-12`.
pub fn check_prop3(g_grid: &[f64], eps_grid: &[f64]) -> CheckResult {
    let mut t = Tracker::new();
    for &g in g_grid {
        for &eps in eps_grid {
            let in_range = g > 0.0 && (0.0..0.5).contains(&eps);
            let v = if in_range {
                let rhs = prop3_rhs(g, eps);
                (h(g, eps) - rhs) / rhs
            } else {
                f64::NAN
            };
            t.record(v, PROP3_TOL, || format!("G={g} eps={eps}"));
        }
    }
    t.finish("prop3", PROP3_TOL)
}

/// Positivity, monotonicity and convexity of `H_G` on each `eps` grid row.
/// The second difference uses the three-point weights for a possibly uneven
/// grid and is normalised so that it equals `H[i+1] - 2H[i] + H[i-1]` on an
/// even one. Violations are reported relative to `H[i]`.
pub fn check_convexity(g_grid: &[f64], eps_grid: &[f64]) -> CheckResult {
    let mut t = Tracker::new();
    let in_range =
        eps_grid.iter().all(|e| (0.0..1.0).contains(e)) && eps_grid.windows(2).all(|w| w[0] < w[1]);
    for &g in g_grid {
        if !(g > 0.0 && in_range) {
            t.record(f64::NAN, CONVEXITY_TOL, || {
                format!("G={g} grid out of range")
            });
            continue;
        }
        let hs: Vec<f64> = eps_grid.iter().map(|&e| h(g, e)).collect();
        for (i, &hv) in hs.iter().enumerate() {
            t.record(if hv > 0.0 { -hv } else { f64::INFINITY }, 0.0, || {
                format!("G={g} eps={} H={hv}", eps_grid[i])
            });
        }
        for i in 1..hs.len() {
            let d = hs[i] - hs[i - 1];
            t.record(
                if d > 0.0 { -d / hs[i] } else { f64::INFINITY },
                0.0,
                || format!("G={g} eps={} first difference {d}", eps_grid[i]),
            );
        }
        for i in 1..hs.len().saturating_sub(1) {
            let h1 = eps_grid[i] - eps_grid[i - 1];
            let h2 = eps_grid[i + 1] - eps_grid[i];
            let second = (h2 * hs[i - 1] - (h1 + h2) * hs[i] + h1 * hs[i + 1]) / ((h1 + h2) / 2.0);
            let v = -second / hs[i];
            t.record(v, CONVEXITY_TOL, || {
                format!("G={g} eps={} second difference {second}", eps_grid[i])
            });
        }
    }
    t.finish("convexity", CONVEXITY_TOL)
}

const BATTERY_TOL: f64 = 1e-12;

/// `P(U_k > k(1+eps)) <= (e^-eps (1+eps))^(k/2)`, compared on the log scale
/// for `eps` in a fixed list and `k = 1..=300`.
pub fn check_chi_square_chernoff() -> CheckResult {
    let mut t = Tracker::new();
    for eps in [0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 4.0] {
        for k in 1..=300u32 {
            let kf = k as f64;
            let chi = ChiSquared::new(kf).expect("k >= 1");
            let tail = chi.sf(kf * (1.0 + eps));
            let ln_bound = kf / 2.0 * (f64::ln_1p(eps) - eps);
            let v = if tail > 0.0 {
                tail.ln() - ln_bound
            } else {
                f64::NEG_INFINITY
            };
            t.record(v, BATTERY_TOL, || format!("eps={eps} k={k}"));
        }
    }
    t.finish("chi-square chernoff", BATTERY_TOL)
}

fn normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// `P(Z > delta sqrt(k)) <= exp(-k delta^2 / 2)` for `delta` in a fixed list
/// and `k = 1..=200`, on the log scale.
pub fn check_normal_chernoff() -> CheckResult {
    let mut t = Tracker::new();
    for delta in [0.05, 0.1, 0.5, 1.0, 2.0] {
        for k in 1..=200u32 {
            let kf = k as f64;
            let tail = normal_sf(delta * kf.sqrt());
            let v = tail.ln() + kf * delta * delta / 2.0;
            t.record(v, BATTERY_TOL, || format!("delta={delta} k={k}"));
        }
    }
    t.finish("normal chernoff", BATTERY_TOL)
}

/// `P(Z > x) <= exp(-x^2/2) / (x sqrt(2 pi))` for `x = 0.01, 0.02, ..., 30`,
/// on the log scale.
pub fn check_mills_ratio() -> CheckResult {
    let mut t = Tracker::new();
    for i in 1..=3000u32 {
        let x = i as f64 / 100.0;
        let ln_bound = -x * x / 2.0 - x.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln();
        let v = normal_sf(x).ln() - ln_bound;
        t.record(v, BATTERY_TOL, || format!("x={x}"));
    }
    t.finish("normal mills ratio", BATTERY_TOL)
}

/// `e^x - 1 >= (e/2) x^2` for `x = 0.001, 0.002, ..., 4`, relative to `e^x - 1`.
pub fn check_expm1_quadratic() -> CheckResult {
    let mut t = Tracker::new();
    for i in 1..=4000u32 {
        let x = i as f64 / 1000.0;
        let lhs = x.exp_m1();
        let v = (std::f64::consts::E / 2.0 * x * x - lhs) / lhs;
        t.record(v, BATTERY_TOL, || format!("x={x}"));
    }
    t.finish("expm1 quadratic", BATTERY_TOL)
}

/// `Gamma(d/2 - 1/2) / Gamma(d/2)` by log-gamma differences.
pub fn gamma_ratio(d: u32) -> f64 {
    let half = d as f64 / 2.0;
    (ln_gamma(half - 0.5) - ln_gamma(half)).exp()
}

/// `Gamma(d/2 - 1/2) / Gamma(d/2) <= sqrt(2 pi / d)` for `d = 2..=200`,
/// relative to the right side.
pub fn check_gamma_ratio() -> CheckResult {
    let mut t = Tracker::new();
    for d in 2..=200u32 {
        let rhs = (2.0 * std::f64::consts::PI / d as f64).sqrt();
        let v = (gamma_ratio(d) - rhs) / rhs;
        t.record(v, BATTERY_TOL, || format!("d={d}"));
    }
    t.finish("gamma ratio", BATTERY_TOL)
}

/// Relative gap `|Gamma(1/2)/Gamma(1) - sqrt(pi)| / sqrt(pi)` at `d = 2`.
pub fn gamma_ratio_equality_gap() -> f64 {
    let rhs = std::f64::consts::PI.sqrt();
    (gamma_ratio(2) - rhs).abs() / rhs
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatteryReport {
    pub checks: Vec<CheckResult>,
    pub gamma_equality_gap: f64,
}

impl BatteryReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed) && self.gamma_equality_gap <= 1e-12
    }
}

/// All checks on their default grids, including the two parametric ones.
pub fn inequality_battery() -> BatteryReport {
    let g = default_g_grid();
    BatteryReport {
        checks: vec![
            check_prop3(&g, &default_prop3_eps_grid()),
            check_convexity(&g, &default_convexity_eps_grid()),
            check_chi_square_chernoff(),
            check_normal_chernoff(),
            check_mills_ratio(),
            check_expm1_quadratic(),
            check_gamma_ratio(),
        ],
        gamma_equality_gap: gamma_ratio_equality_gap(),
    }
}
