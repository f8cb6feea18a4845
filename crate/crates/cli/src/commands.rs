use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use normal_bandits::bounds::{bound_report, BoundReport, EpsilonSchedule};
use normal_bandits::report::{
    to_bytes, write_arm_terms, write_battery, write_bounds, write_conjecture, write_log_ratio,
    write_sandwich, write_traces,
};
use normal_bandits::sim::{default_log_grid, run_experiment};
use normal_bandits::verify::conjecture::{combined_se, conjecture_ratio, ConjectureCase};
use normal_bandits::verify::inequalities::inequality_battery;
use normal_bandits::verify::sandwich::{default_grid, run_grid};
use normal_bandits::{BanditInstance, ExperimentConfig, PolicySpec, RegretTrace};
use serde::Serialize;

use crate::config::{self, Overrides};
use crate::svg::{Plot, Series};

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: Option<String>,
    pub out_dir: String,
    pub files: Vec<String>,
    pub duration_secs: f64,
    pub version: String,
    pub seed: Option<u64>,
}

/// Collects written files and finishes with the manifest.
pub struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
    start: Instant,
}

impl Outputs {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)
            .with_context(|| format!("cannot create output directory {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
            start: Instant::now(),
        })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).with_context(|| format!("cannot write {}", path.display()))?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn finish(self, command: &str, config: Option<&Path>, seed: Option<u64>) -> Result<()> {
        let manifest = RunManifest {
            command: command.to_string(),
            config: config.map(|p| p.display().to_string()),
            out_dir: self.dir.display().to_string(),
            files: self.files.clone(),
            duration_secs: self.start.elapsed().as_secs_f64(),
            version: normal_bandits::VERSION.to_string(),
            seed,
        };
        let path = self.dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&manifest)?;
        fs::write(&path, text + "\n").with_context(|| format!("cannot write {}", path.display()))
    }
}

pub struct Common {
    pub out: PathBuf,
    pub overrides: Overrides,
    pub svg: bool,
    pub log_x: bool,
}

fn regret_plot(title: &str, traces: &[RegretTrace], log_x: bool, variance: bool) -> Plot {
    Plot {
        title: title.to_string(),
        x_label: "n".into(),
        y_label: if variance {
            "variance of regret"
        } else {
            "mean regret"
        }
        .into(),
        log_x,
        series: traces
            .iter()
            .map(|t| Series {
                name: t.policy.label(),
                points: t
                    .times
                    .iter()
                    .zip(if variance {
                        &t.var_regret
                    } else {
                        &t.mean_regret
                    })
                    .map(|(&n, &r)| (n as f64, r))
                    .collect(),
            })
            .collect(),
        ..Plot::default()
    }
}

fn bounds_plot(title: &str, report: &BoundReport, log_x: bool) -> Plot {
    let xs: Vec<f64> = report.times.iter().map(|&n| n as f64).collect();
    let series = |name: &str, ys: Vec<Option<f64>>| Series {
        name: name.to_string(),
        points: xs
            .iter()
            .zip(ys)
            .filter_map(|(&x, y)| Some((x, y?)))
            .collect(),
    };
    Plot {
        title: title.to_string(),
        x_label: "n".into(),
        y_label: "regret bound".into(),
        log_x,
        log_y: true,
        series: vec![
            series(
                "M_BK ln n",
                xs.iter().map(|x| Some(report.m_bk * x.ln())).collect(),
            ),
            series(
                "ACF bound",
                report.acf_bound.iter().map(|&v| Some(v)).collect(),
            ),
            series("CHK finite bound", report.chk_bound_eps.clone()),
            series("CHK remainder bound", report.chk_remainder_bound.clone()),
        ],
        hlines: vec![],
    }
}

fn ratio_plot(title: &str, traces: &[RegretTrace], m_bk: f64, log_x: bool) -> Plot {
    Plot {
        title: title.to_string(),
        x_label: "n".into(),
        y_label: "R(n) / ln n".into(),
        log_x,
        series: traces
            .iter()
            .map(|t| Series {
                name: t.policy.label(),
                points: t
                    .times
                    .iter()
                    .zip(&t.mean_regret)
                    .filter(|(&n, _)| n > 1)
                    .map(|(&n, &r)| (n as f64, r / (n as f64).ln()))
                    .collect(),
            })
            .collect(),
        hlines: vec![("M_BK".into(), m_bk)],
        ..Plot::default()
    }
}

pub fn simulate(path: &Path, c: &Common) -> Result<()> {
    let cfg = config::load(path)?
        .experiment(&c.overrides)
        .with_context(|| format!("config {}", path.display()))?;
    let mut out = Outputs::new(&c.out)?;
    let traces = run_experiment(&cfg)?;
    out.write("traces.csv", &to_bytes(|b| write_traces(b, &traces))?)?;
    if c.svg {
        let plot = regret_plot("Mean regret", &traces, c.log_x, false);
        out.write("regret.svg", plot.render().as_bytes())?;
    }
    for t in &traces {
        let (mean, _) = t.at(cfg.horizon).unwrap_or_default();
        println!(
            "{:<24} mean regret at n = {}: {mean:.4}",
            t.policy.label(),
            cfg.horizon
        );
    }
    out.finish("simulate", Some(path), Some(cfg.seed))
}

pub fn bounds(path: &Path, schedule: EpsilonSchedule, c: &Common) -> Result<()> {
    let file = config::load(path)?;
    let (instance, times) =
        (|| Ok::<_, anyhow::Error>((file.instance()?, file.times(&c.overrides)?)))()
            .with_context(|| format!("config {}", path.display()))?;
    let mut out = Outputs::new(&c.out)?;
    let report = bound_report(&instance, &times, schedule)?;
    out.write("bounds.csv", &to_bytes(|b| write_bounds(b, &report))?)?;
    out.write("arm_terms.csv", &to_bytes(|b| write_arm_terms(b, &report))?)?;
    if c.svg {
        let plot = bounds_plot("Regret bounds", &report, c.log_x);
        out.write("bounds.svg", plot.render().as_bytes())?;
    }
    println!("M_BK = {}", report.m_bk);
    out.finish("bounds", Some(path), None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Sandwich,
    Conjecture,
    Inequalities,
    All,
}

/// Runs the selected checks; `Ok(false)` when any fails.
pub fn verify(suite: Suite, samples: Option<u64>, seed: u64, c: &Common) -> Result<bool> {
    let mut out = Outputs::new(&c.out)?;
    let mut ok = true;
    if matches!(suite, Suite::Sandwich | Suite::All) {
        let outcomes = run_grid(&default_grid(samples.unwrap_or(1_000_000)), seed)?;
        for o in &outcomes {
            let c = &o.case;
            println!(
                "sandwich delta={} p={} d={} k={}: estimate {:.4e} (se {:.2e}) in [{:.4e}, {:.4e}] {}",
                c.delta,
                c.p,
                c.d,
                c.k,
                o.estimate.value,
                o.estimate.se,
                o.lower.value,
                o.upper,
                if o.inside { "ok" } else { "OUTSIDE" }
            );
            ok &= o.inside;
        }
        out.write(
            "verify_sandwich.csv",
            &to_bytes(|b| write_sandwich(b, &outcomes))?,
        )?;
    }
    if matches!(suite, Suite::Conjecture | Suite::All) {
        let case = ConjectureCase::standard(samples.unwrap_or(100_000).max(1000));
        let points = conjecture_ratio(&case, seed);
        for p in &points {
            println!(
                "conjecture k={}: k*P = {:.4} (se {:.4})",
                p.k, p.ratio, p.ratio_se
            );
        }
        for w in points.windows(2) {
            let z = (w[1].ratio - w[0].ratio) / combined_se(&w[0], &w[1]);
            let pass = z > 2.0;
            println!(
                "conjecture increase {} -> {}: {z:.2} combined SE {}",
                w[0].k,
                w[1].k,
                if pass { "ok" } else { "NOT INCREASING" }
            );
            ok &= pass;
        }
        out.write(
            "verify_conjecture.csv",
            &to_bytes(|b| write_conjecture(b, &points))?,
        )?;
    }
    if matches!(suite, Suite::Inequalities | Suite::All) {
        let report = inequality_battery();
        for ch in &report.checks {
            println!(
                "inequality {}: {} cases, max violation {:.3e} (tolerance {:.0e}) {}",
                ch.name,
                ch.cases,
                ch.max_violation,
                ch.tolerance,
                if ch.passed { "ok" } else { "FAILED" }
            );
            if !ch.passed {
                println!("  worst case: {}", ch.worst_case);
            }
        }
        println!(
            "inequality gamma ratio equality at d=2: gap {:.3e}",
            report.gamma_equality_gap
        );
        ok &= report.passed();
        out.write(
            "verify_inequalities.csv",
            &to_bytes(|b| write_battery(b, &report))?,
        )?;
    }
    println!(
        "verify: {}",
        if ok { "all checks passed" } else { "FAILED" }
    );
    out.finish("verify", None, Some(seed))?;
    Ok(ok)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Figure {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
}

impl Figure {
    /// Desk-scale `(horizon, replications)`.
    pub fn defaults(self) -> (u64, u64) {
        match self {
            Figure::Fig1 | Figure::Fig2 => (100_000, 500),
            Figure::Fig3 | Figure::Fig4 => (10_000, 2000),
        }
    }
}

pub const DEFAULT_SEED: u64 = 1;

fn canned(
    instance: BanditInstance,
    policies: Vec<PolicySpec>,
    figure: Figure,
    o: &Overrides,
) -> Result<ExperimentConfig> {
    let (h, r) = figure.defaults();
    let horizon = o.horizon.unwrap_or(h);
    Ok(ExperimentConfig::new(
        instance,
        policies,
        horizon,
        o.replications.unwrap_or(r),
        o.seed.unwrap_or(DEFAULT_SEED),
        default_log_grid(horizon),
    )?)
}

pub fn reproduce(figure: Figure, schedule: EpsilonSchedule, c: &Common) -> Result<()> {
    let mut out = Outputs::new(&c.out)?;
    let ts = PolicySpec::Thompson { alpha: -1.0 };
    let seed = c.overrides.seed.unwrap_or(DEFAULT_SEED);
    match figure {
        Figure::Fig1 => {
            let cfg = canned(
                BanditInstance::table1(),
                vec![PolicySpec::Acf, PolicySpec::Chk, PolicySpec::Greedy],
                figure,
                &c.overrides,
            )?;
            let traces = run_experiment(&cfg)?;
            out.write("fig1_regret.csv", &to_bytes(|b| write_traces(b, &traces))?)?;
            let plot = regret_plot("Mean regret, table 1 instance", &traces, c.log_x, false);
            out.write("fig1_regret.svg", plot.render().as_bytes())?;
        }
        Figure::Fig2 => {
            let inst = BanditInstance::table1();
            let cfg = canned(inst.clone(), vec![PolicySpec::Chk], figure, &c.overrides)?;
            let report = bound_report(&inst, &cfg.log_grid, schedule)?;
            out.write("fig2_bounds.csv", &to_bytes(|b| write_bounds(b, &report))?)?;
            out.write(
                "fig2_arm_terms.csv",
                &to_bytes(|b| write_arm_terms(b, &report))?,
            )?;
            let plot = bounds_plot("Regret bounds, table 1 instance", &report, c.log_x);
            out.write("fig2_bounds.svg", plot.render().as_bytes())?;
            let traces = run_experiment(&cfg)?;
            out.write(
                "fig2_chk_regret.csv",
                &to_bytes(|b| write_traces(b, &traces))?,
            )?;
            out.write(
                "fig2_ratio.csv",
                &to_bytes(|b| write_log_ratio(b, &traces))?,
            )?;
            let plot = ratio_plot(
                "R(n) / ln n for CHK, table 1 instance",
                &traces,
                report.m_bk,
                c.log_x,
            );
            out.write("fig2_ratio.svg", plot.render().as_bytes())?;
        }
        Figure::Fig3 | Figure::Fig4 => {
            let variance = figure == Figure::Fig4;
            let prefix = if variance { "fig4" } else { "fig3" };
            for (name, inst) in [
                ("table1", BanditInstance::table1()),
                ("table2", BanditInstance::table2()),
            ] {
                let cfg = canned(
                    inst,
                    vec![PolicySpec::Chk, ts.clone()],
                    figure,
                    &c.overrides,
                )?;
                let traces = run_experiment(&cfg)?;
                out.write(
                    &format!("{prefix}_{name}_traces.csv"),
                    &to_bytes(|b| write_traces(b, &traces))?,
                )?;
                let (title, file) = if variance {
                    (
                        format!("Variance of sample regret, {name}"),
                        format!("{prefix}_{name}_variance.svg"),
                    )
                } else {
                    (
                        format!("Mean regret, {name}"),
                        format!("{prefix}_{name}_regret.svg"),
                    )
                };
                let plot = regret_plot(&title, &traces, c.log_x, variance);
                out.write(&file, plot.render().as_bytes())?;
            }
        }
    }
    let name = format!("reproduce {}", format!("{figure:?}").to_lowercase());
    out.finish(&name, None, Some(seed))
}
