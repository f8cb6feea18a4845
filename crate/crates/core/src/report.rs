//! CSV serialisation of experiment and verification results.
//!
//! Floats are written in Rust's shortest round-trip form, so equal values give
//! equal bytes. Missing values are empty cells.

use std::io::Write;

use crate::bounds::BoundReport;
use crate::error::{Error, Result};
use crate::sim::RegretTrace;
use crate::verify::conjecture::RatioPoint;
use crate::verify::inequalities::BatteryReport;
use crate::verify::sandwich::SandwichOutcome;

fn csv_err(e: impl std::fmt::Display) -> Error {
    Error::Csv(e.to_string())
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn write_rows<W: Write>(
    out: W,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(csv_err)
}

/// Columns `policy,n,mean_regret,var_regret,se,replications`.
pub fn write_traces<W: Write>(out: W, traces: &[RegretTrace]) -> Result<()> {
    let rows = traces.iter().flat_map(|t| {
        let label = t.policy.label();
        let se = t.standard_errors();
        (0..t.times.len())
            .map(|j| {
                vec![
                    label.clone(),
                    t.times[j].to_string(),
                    num(t.mean_regret[j]),
                    num(t.var_regret[j]),
                    num(se[j]),
                    t.replications.to_string(),
                ]
            })
            .collect::<Vec<_>>()
    });
    write_rows(
        out,
        &[
            "policy",
            "n",
            "mean_regret",
            "var_regret",
            "se",
            "replications",
        ],
        rows,
    )
}

/// Columns `policy,n,regret_over_log_n,se_over_log_n`, skipping `n = 1`.
pub fn write_log_ratio<W: Write>(out: W, traces: &[RegretTrace]) -> Result<()> {
    let rows = traces.iter().flat_map(|t| {
        let label = t.policy.label();
        let se = t.standard_errors();
        (0..t.times.len())
            .filter(|&j| t.times[j] > 1)
            .map(|j| {
                let l = (t.times[j] as f64).ln();
                vec![
                    label.clone(),
                    t.times[j].to_string(),
                    num(t.mean_regret[j] / l),
                    num(se[j] / l),
                ]
            })
            .collect::<Vec<_>>()
    });
    write_rows(
        out,
        &["policy", "n", "regret_over_log_n", "se_over_log_n"],
        rows,
    )
}

/// Columns `n,m_bk,m_bk_log_n,acf_bound,epsilon,chk_bound_eps,chk_remainder_bound`.
pub fn write_bounds<W: Write>(out: W, report: &BoundReport) -> Result<()> {
    let rows = (0..report.times.len()).map(|j| {
        let n = report.times[j];
        vec![
            n.to_string(),
            num(report.m_bk),
            num(report.m_bk * (n as f64).ln()),
            num(report.acf_bound[j]),
            num(report.epsilons[j]),
            opt(report.chk_bound_eps[j]),
            opt(report.chk_remainder_bound[j]),
        ]
    });
    write_rows(
        out,
        &[
            "n",
            "m_bk",
            "m_bk_log_n",
            "acf_bound",
            "epsilon",
            "chk_bound_eps",
            "chk_remainder_bound",
        ],
        rows,
    )
}

/// Columns `arm,delta,variance,kl,m_bk_term,acf_log_term`; arms are 1-based.
pub fn write_arm_terms<W: Write>(out: W, report: &BoundReport) -> Result<()> {
    let rows = report.per_arm_terms.iter().map(|a| {
        vec![
            (a.arm + 1).to_string(),
            num(a.delta),
            num(a.variance),
            num(a.kl),
            num(a.m_bk_term),
            num(a.acf_log_term),
        ]
    });
    write_rows(
        out,
        &[
            "arm",
            "delta",
            "variance",
            "kl",
            "m_bk_term",
            "acf_log_term",
        ],
        rows,
    )
}

pub fn write_sandwich<W: Write>(out: W, outcomes: &[SandwichOutcome]) -> Result<()> {
    let rows = outcomes.iter().map(|o| {
        vec![
            num(o.case.delta),
            num(o.case.p),
            o.case.d.to_string(),
            o.case.k.to_string(),
            o.case.mc_samples.to_string(),
            num(o.estimate.value),
            num(o.estimate.se),
            num(o.lower.value),
            num(o.upper),
            o.inside.to_string(),
        ]
    });
    write_rows(
        out,
        &[
            "delta", "p", "d", "k", "samples", "estimate", "se", "lower", "upper", "inside",
        ],
        rows,
    )
}

pub fn write_conjecture<W: Write>(out: W, points: &[RatioPoint]) -> Result<()> {
    let rows = points.iter().map(|p| {
        vec![
            p.k.to_string(),
            p.probability.hits.to_string(),
            p.probability.trials.to_string(),
            num(p.probability.value),
            num(p.ratio),
            num(p.ratio_se),
        ]
    });
    write_rows(
        out,
        &["k", "hits", "paths", "probability", "ratio", "ratio_se"],
        rows,
    )
}

pub fn write_battery<W: Write>(out: W, report: &BatteryReport) -> Result<()> {
    let mut rows: Vec<Vec<String>> = report
        .checks
        .iter()
        .map(|c| {
            vec![
                c.name.clone(),
                c.cases.to_string(),
                num(c.max_violation),
                num(c.tolerance),
                c.passed.to_string(),
                c.worst_case.clone(),
            ]
        })
        .collect();
    rows.push(vec![
        "gamma ratio equality d=2".into(),
        "1".into(),
        num(report.gamma_equality_gap),
        num(1e-12),
        (report.gamma_equality_gap <= 1e-12).to_string(),
        "d=2".into(),
    ]);
    write_rows(
        out,
        &[
            "check",
            "cases",
            "max_violation",
            "tolerance",
            "passed",
            "worst_case",
        ],
        rows,
    )
}

/// Runs `f` against an in-memory buffer and returns the bytes.
pub fn to_bytes<F>(f: F) -> Result<Vec<u8>>
where
    F: FnOnce(&mut Vec<u8>) -> Result<()>,
{
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}
