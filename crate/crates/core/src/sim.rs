//! Seeded episodes and replicated regret experiments.
//!
//! Replication `r` of policy `p` draws rewards from
//! `replication_stream(seed, domain_id(p.label()), r, LANE_REWARDS)` and any
//! posterior noise from the matching `LANE_POLICY` stream. Per-replication
//! paths are collected in replication order before reduction, so the output
//! does not depend on the number of worker threads.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::instance::{pseudo_regret, BanditInstance};
use crate::policy::{select, PolicySpec, PolicyState};
use crate::rng::{domain_id, replication_stream, LANE_POLICY, LANE_REWARDS};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub instance: BanditInstance,
    pub policies: Vec<PolicySpec>,
    pub horizon: u64,
    pub replications: u64,
    pub seed: u64,
    pub log_grid: Vec<u64>,
}

impl ExperimentConfig {
    /// Builds and validates a config. An empty `log_grid` selects [`default_log_grid`].
    pub fn new(
        instance: BanditInstance,
        policies: Vec<PolicySpec>,
        horizon: u64,
        replications: u64,
        seed: u64,
        log_grid: Vec<u64>,
    ) -> Result<Self> {
        let log_grid = if log_grid.is_empty() {
            default_log_grid(horizon)
        } else {
            log_grid
        };
        let config = Self {
            instance,
            policies,
            horizon,
            replications,
            seed,
            log_grid,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.instance.n_arms();
        if self.policies.is_empty() {
            return Err(Error::InvalidConfig("no policies given".into()));
        }
        for (i, p) in self.policies.iter().enumerate() {
            p.validate(n)
                .map_err(|e| Error::InvalidConfig(format!("policies[{i}]: {e}")))?;
        }
        let need = self
            .policies
            .iter()
            .map(|p| p.init_pulls())
            .max()
            .unwrap_or(0)
            .max(3)
            * n as u64;
        if self.horizon < need {
            return Err(Error::InvalidConfig(format!(
                "horizon {} is shorter than the initialization phase ({need} pulls)",
                self.horizon
            )));
        }
        if self.replications == 0 {
            return Err(Error::InvalidConfig("replications must be >= 1".into()));
        }
        validate_grid(&self.log_grid, self.horizon)
    }
}

fn validate_grid(grid: &[u64], horizon: u64) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidConfig("log_grid is empty".into()));
    }
    if grid[0] == 0 {
        return Err(Error::InvalidConfig("log_grid times must be >= 1".into()));
    }
    if let Some(w) = grid.windows(2).find(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig(format!(
            "log_grid must be strictly increasing ({} then {})",
            w[0], w[1]
        )));
    }
    if *grid.last().unwrap() > horizon {
        return Err(Error::InvalidConfig(format!(
            "log_grid time {} exceeds horizon {horizon}",
            grid.last().unwrap()
        )));
    }
    Ok(())
}

/// `round(horizon^(i/50))` for `i = 0..=50`, deduplicated; always ends at `horizon`.
pub fn default_log_grid(horizon: u64) -> Vec<u64> {
    if horizon == 0 {
        return Vec::new();
    }
    let h = horizon as f64;
    let mut grid: Vec<u64> = (0..=50)
        .map(|i| (h.powf(i as f64 / 50.0).round() as u64).clamp(1, horizon))
        .collect();
    grid.dedup();
    if *grid.last().unwrap() != horizon {
        grid.push(horizon);
    }
    grid
}

/// Cross-replication summary of pseudo-regret for one policy.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretTrace {
    pub policy: PolicySpec,
    pub times: Vec<u64>,
    pub mean_regret: Vec<f64>,
    pub var_regret: Vec<f64>,
    pub replications: u64,
}

impl RegretTrace {
    /// Standard error of each mean, `sqrt(var / replications)`.
    pub fn standard_errors(&self) -> Vec<f64> {
        let r = self.replications as f64;
        self.var_regret.iter().map(|v| (v / r).sqrt()).collect()
    }

    pub fn at(&self, n: u64) -> Option<(f64, f64)> {
        let j = self.times.iter().position(|&t| t == n)?;
        Some((self.mean_regret[j], self.var_regret[j]))
    }

    fn from_paths(policy: PolicySpec, times: Vec<u64>, paths: &[Vec<f64>]) -> Self {
        let r = paths.len();
        let mut mean_regret = Vec::with_capacity(times.len());
        let mut var_regret = Vec::with_capacity(times.len());
        for j in 0..times.len() {
            let mean = paths.iter().map(|p| p[j]).sum::<f64>() / r as f64;
            let var = if r > 1 {
                paths.iter().map(|p| (p[j] - mean).powi(2)).sum::<f64>() / (r - 1) as f64
            } else {
                0.0
            };
            mean_regret.push(mean);
            var_regret.push(var);
        }
        Self {
            policy,
            times,
            mean_regret,
            var_regret,
            replications: r as u64,
        }
    }
}

/// Plays one episode and returns the arm counts at each time in `log_grid`.
///
/// Rewards are `mean_i + sd_i * z` with `z` standard normal, drawn from
/// `rewards` once per pull in pull order. Policy randomness comes only
/// from `noise`.
pub fn run_episode<R1, R2>(
    spec: &PolicySpec,
    instance: &BanditInstance,
    horizon: u64,
    log_grid: &[u64],
    rewards: &mut R1,
    noise: &mut R2,
) -> Result<Vec<Vec<u64>>>
where
    R1: Rng + ?Sized,
    R2: Rng + ?Sized,
{
    let n = instance.n_arms();
    spec.validate(n)?;
    let need = spec.init_pulls() * n as u64;
    if horizon < need {
        return Err(Error::InvalidConfig(format!(
            "horizon {horizon} is shorter than the initialization phase ({need} pulls)"
        )));
    }
    validate_grid(log_grid, horizon)?;

    let means = instance.means();
    let sds: Vec<f64> = instance.variances().iter().map(|v| v.sqrt()).collect();
    let mut state = PolicyState::new(n);
    let mut out = Vec::with_capacity(log_grid.len());
    let mut next = log_grid.iter().peekable();
    for t in 1..=horizon {
        let arm = select(spec, &state, noise);
        let z: f64 = rewards.sample(StandardNormal);
        state.record(arm, means[arm] + sds[arm] * z)?;
        if next.peek() == Some(&&t) {
            out.push(state.counts().collect());
            next.next();
        }
    }
    Ok(out)
}

/// Pseudo-regret path of replication `replication` of `spec` under `config`.
pub fn replication_regret(
    config: &ExperimentConfig,
    spec: &PolicySpec,
    replication: u64,
) -> Result<Vec<f64>> {
    let domain = domain_id(&spec.label());
    let mut rewards = replication_stream(config.seed, domain, replication, LANE_REWARDS);
    let mut noise = replication_stream(config.seed, domain, replication, LANE_POLICY);
    let counts = run_episode(
        spec,
        &config.instance,
        config.horizon,
        &config.log_grid,
        &mut rewards,
        &mut noise,
    )?;
    let summary = config.instance.summary();
    counts.iter().map(|c| pseudo_regret(summary, c)).collect()
}

/// Runs every policy for `config.replications` replications on the current rayon pool.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<RegretTrace>> {
    config.validate()?;
    config
        .policies
        .iter()
        .map(|spec| {
            let paths = (0..config.replications)
                .into_par_iter()
                .map(|r| replication_regret(config, spec, r))
                .collect::<Result<Vec<_>>>()?;
            Ok(RegretTrace::from_paths(
                spec.clone(),
                config.log_grid.clone(),
                &paths,
            ))
        })
        .collect()
}

/// [`run_experiment`] on a dedicated pool of `threads` workers.
pub fn run_experiment_with_threads(
    config: &ExperimentConfig,
    threads: usize,
) -> Result<Vec<RegretTrace>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::ThreadPool(e.to_string()))?;
    pool.install(|| run_experiment(config))
}
