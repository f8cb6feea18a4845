use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn nbandit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nbandit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL: &str = r#"{
  "instance": {"means": [1.0, 0.5, 0.0], "variances": [1.0, 2.0, 0.5]},
  "policies": [{"kind": "chk"}, {"kind": "acf"}, {"kind": "ts", "alpha": -1},
               {"kind": "greedy"}, {"kind": "bk"},
               {"kind": "known_variance", "known_sigmas": [1.0, 1.4, 0.7]}],
  "horizon": 300,
  "replications": 12,
  "seed": 5
}"#;

fn read(dir: &Path, name: &str) -> Vec<u8> {
    fs::read(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_slice(&read(dir, "manifest.json")).unwrap()
}

#[test]
fn simulate_is_deterministic_across_threads() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let mut outputs = Vec::new();
    for threads in ["1", "2", "8", "1"] {
        let out = tmp.path().join(format!("run{threads}-{}", outputs.len()));
        let o = nbandit(&[
            "simulate",
            "--config",
            &cfg,
            "--out",
            out.to_str().unwrap(),
            "--threads",
            threads,
            "--svg",
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push(read(&out, "traces.csv"));
        assert!(String::from_utf8(read(&out, "regret.svg"))
            .unwrap()
            .contains("</svg>"));
        let m = manifest(&out);
        assert_eq!(m["files"], serde_json::json!(["traces.csv", "regret.svg"]));
        assert_eq!(m["seed"], 5);
        assert_eq!(m["command"], "simulate");
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));

    let text = String::from_utf8(outputs[0].clone()).unwrap();
    let header = text.lines().next().unwrap();
    assert_eq!(header, "policy,n,mean_regret,var_regret,se,replications");
    assert!(text.contains("\nts(alpha=-1),300,"));
    assert!(text.contains("\nknown-var(sigmas=1;1.4;0.7),300,"));
}

#[test]
fn svg_does_not_change_csv() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert!(
        nbandit(&["simulate", "--config", &cfg, "--out", a.to_str().unwrap()])
            .status
            .success()
    );
    assert!(nbandit(&[
        "simulate",
        "--config",
        &cfg,
        "--out",
        b.to_str().unwrap(),
        "--svg",
        "--log-x"
    ])
    .status
    .success());
    assert_eq!(read(&a, "traces.csv"), read(&b, "traces.csv"));
    assert!(!a.join("regret.svg").exists());
}

#[test]
fn overrides_take_precedence() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out = tmp.path().join("o");
    let o = nbandit(&[
        "simulate",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--seed",
        "9",
        "--replications",
        "1",
        "--horizon",
        "100",
    ]);
    assert!(o.status.success());
    let text = String::from_utf8(read(&out, "traces.csv")).unwrap();
    let last = text.lines().last().unwrap();
    assert!(last.contains(",100,"), "{last}");
    assert!(last.ends_with(",0,0,1"), "{last}");
    assert_eq!(manifest(&out)["seed"], 9);
}

#[test]
fn invalid_configs_exit_one_with_diagnostics() {
    let tmp = TempDir::new().unwrap();
    let cases = [
        (
            SMALL.replace("\"seed\": 5", "\"seed\": 5, \"colour\": 1"),
            "line 8",
        ),
        (
            SMALL.replace("\"alpha\": -1", "\"alpha\": 1"),
            "policies[2]",
        ),
        (SMALL.replace("\"bk\"", "\"ucb\""), "policies[4].kind"),
        (SMALL.replace("[1.0, 2.0, 0.5]", "[1.0, 2.0]"), "instance"),
        (
            SMALL.replace("\"horizon\": 300", "\"horizon\": 4"),
            "horizon",
        ),
        (
            SMALL.replace("\"replications\": 12", "\"replications\": 0"),
            "replications",
        ),
    ];
    for (body, needle) in cases {
        let cfg = write_config(tmp.path(), &body);
        let o = nbandit(&[
            "simulate",
            "--config",
            &cfg,
            "--out",
            tmp.path().join("x").to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(1), "{needle}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(needle), "expected {needle:?} in {err}");
    }
    let o = nbandit(&["simulate", "--config", "/nonexistent/config.json"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unwritable_output_exits_one() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let o = nbandit(&[
        "simulate",
        "--config",
        &cfg,
        "--out",
        blocker.join("sub").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(nbandit(&["verify", "everything"]).status.code(), Some(1));
    assert_eq!(nbandit(&["reproduce", "fig9"]).status.code(), Some(1));
    assert_eq!(nbandit(&[]).status.code(), Some(1));
    assert_eq!(nbandit(&["--help"]).status.code(), Some(0));
}

#[test]
fn bounds_table1() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"instance": {"means": [8, 8, 7.9, 7, -1, 0], "variances": [1, 1.4, 0.5, 3, 1, 4]},
            "log_grid": [1, 2, 3, 10, 100, 1000]}"#,
    );
    let out = tmp.path().join("b");
    let o = nbandit(&[
        "bounds",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--svg",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let bytes = read(&out, "bounds.csv");
    let mut rdr = csv::Reader::from_reader(bytes.as_slice());
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 6);
    for r in &rows {
        let m: f64 = r[1].parse().unwrap();
        assert!((m - 26.78).abs() < 0.01);
    }
    // at n = 1 the ACF bound is its constant (1 + pi^2/2) * sum of gaps
    let c_acf: f64 = rows[0][3].parse().unwrap();
    let gaps = 0.1 + 1.0 + 9.0 + 8.0;
    assert!((c_acf - (1.0 + std::f64::consts::PI.powi(2) / 2.0) * gaps).abs() < 1e-9);
    assert_eq!(&rows[0][5], "");
    assert!(!rows[2][5].is_empty());
    assert_eq!(
        read(&out, "arm_terms.csv")
            .iter()
            .filter(|&&b| b == b'\n')
            .count(),
        5
    );
    assert!(out.join("bounds.svg").exists());
    assert!(String::from_utf8_lossy(&o.stdout).contains("M_BK = 26.78"));
}

#[test]
fn bounds_all_optimal_is_zero() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"instance": {"means": [1, 1], "variances": [1, 2]}, "log_grid": [1, 10, 100]}"#,
    );
    let out = tmp.path().join("b");
    assert!(
        nbandit(&["bounds", "--config", &cfg, "--out", out.to_str().unwrap()])
            .status
            .success()
    );
    let bytes = read(&out, "bounds.csv");
    let mut rdr = csv::Reader::from_reader(bytes.as_slice());
    for r in rdr.records().map(|r| r.unwrap()) {
        for col in [1, 2, 3, 5, 6] {
            if !r[col].is_empty() {
                assert_eq!(r[col].parse::<f64>().unwrap(), 0.0, "column {col} in {r:?}");
            }
        }
    }
}

#[test]
fn epsilon_schedules() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"instance": {"means": [0, -1], "variances": [1, 1]}, "log_grid": [10, 100]}"#,
    );
    let out = tmp.path().join("b");
    let o = nbandit(&[
        "bounds",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--epsilon-schedule",
        "fixed:0.3",
    ]);
    assert!(o.status.success());
    let text = String::from_utf8(read(&out, "bounds.csv")).unwrap();
    assert!(text
        .lines()
        .skip(1)
        .all(|l| l.split(',').nth(4) == Some("0.3")));
    let o = nbandit(&[
        "bounds",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--epsilon-schedule",
        "remark3",
    ]);
    assert!(o.status.success());
    let text = String::from_utf8(read(&out, "bounds.csv")).unwrap();
    assert!(text
        .lines()
        .skip(1)
        .all(|l| l.split(',').nth(5) == Some("")));
    for bad in ["fixed:1.5", "fixed:x", "theorem4"] {
        let o = nbandit(&["bounds", "--config", &cfg, "--epsilon-schedule", bad]);
        assert_eq!(o.status.code(), Some(1), "{bad}");
    }
}

#[test]
fn verify_inequalities_passes() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("v");
    let o = nbandit(&["verify", "inequalities", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("gamma ratio equality at d=2"));
    assert!(stdout.contains("all checks passed"));
    let csv = String::from_utf8(read(&out, "verify_inequalities.csv")).unwrap();
    assert_eq!(csv.lines().count(), 9);
    assert!(!csv.contains(",false,"));
}

#[test]
fn verify_conjecture_reports_ratios() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("v");
    let o = nbandit(&[
        "verify",
        "conjecture",
        "--samples",
        "20000",
        "--out",
        out.to_str().unwrap(),
    ]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(matches!(o.status.code(), Some(0) | Some(2)), "{stdout}");
    assert_eq!(stdout.matches("conjecture k=").count(), 4);
    let csv = String::from_utf8(read(&out, "verify_conjecture.csv")).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "k,hits,paths,probability,ratio,ratio_se"
    );
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn verify_failure_exits_two() {
    // 1000 paths cannot separate k*P between k = 1000 and k = 10000
    let tmp = TempDir::new().unwrap();
    let o = nbandit(&[
        "verify",
        "conjecture",
        "--samples",
        "1000",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&o.stdout)
    );
    assert!(String::from_utf8_lossy(&o.stdout).contains("NOT INCREASING"));
}

#[test]
fn reproduce_small_bundles() {
    let tmp = TempDir::new().unwrap();
    let small = ["--horizon", "300", "--replications", "4", "--threads", "2"];
    let expected: [(&str, &[&str]); 4] = [
        ("fig1", &["fig1_regret.csv", "fig1_regret.svg"]),
        (
            "fig2",
            &[
                "fig2_bounds.csv",
                "fig2_arm_terms.csv",
                "fig2_bounds.svg",
                "fig2_chk_regret.csv",
                "fig2_ratio.csv",
                "fig2_ratio.svg",
            ],
        ),
        (
            "fig3",
            &[
                "fig3_table1_traces.csv",
                "fig3_table1_regret.svg",
                "fig3_table2_traces.csv",
                "fig3_table2_regret.svg",
            ],
        ),
        (
            "fig4",
            &[
                "fig4_table1_traces.csv",
                "fig4_table1_variance.svg",
                "fig4_table2_traces.csv",
                "fig4_table2_variance.svg",
            ],
        ),
    ];
    for (fig, files) in expected {
        let out = tmp.path().join(fig);
        let mut args = vec!["reproduce", fig, "--out", out.to_str().unwrap()];
        args.extend(small);
        let o = nbandit(&args);
        assert!(
            o.status.success(),
            "{fig}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        let m = manifest(&out);
        let listed: Vec<&str> = m["files"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_str().unwrap())
            .collect();
        assert_eq!(listed, files, "{fig}");
        for f in files {
            assert!(out.join(f).exists(), "{fig}: {f}");
        }
    }
    let ratio = String::from_utf8(read(&tmp.path().join("fig2"), "fig2_ratio.svg")).unwrap();
    assert!(ratio.contains("M_BK"));
    assert!(ratio.contains("stroke-dasharray"));
}
