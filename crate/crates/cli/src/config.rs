//! JSON experiment configs.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use normal_bandits::sim::default_log_grid;
use normal_bandits::{BanditInstance, ExperimentConfig, PolicySpec};
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub instance: InstanceConfig,
    #[serde(default)]
    pub policies: Vec<PolicyConfig>,
    pub horizon: Option<u64>,
    pub replications: Option<u64>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub log_grid: Vec<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceConfig {
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyConfig {
    pub kind: String,
    pub alpha: Option<f64>,
    pub known_sigmas: Option<Vec<f64>>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub replications: Option<u64>,
    pub horizon: Option<u64>,
}

pub fn load(path: &Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    parse(&text).with_context(|| format!("config {}", path.display()))
}

pub fn parse(text: &str) -> Result<ConfigFile> {
    // serde_json reports line and column of the offending token
    serde_json::from_str(text).map_err(|e| anyhow!("{e}"))
}

impl PolicyConfig {
    pub fn to_spec(&self, idx: usize) -> Result<PolicySpec> {
        let field = |name: &str| format!("field `policies[{idx}].{name}`");
        let no_alpha = || -> Result<()> {
            if self.alpha.is_some() {
                bail!("{}: only valid for kind \"ts\"", field("alpha"));
            }
            Ok(())
        };
        let no_sigmas = || -> Result<()> {
            if self.known_sigmas.is_some() {
                bail!(
                    "{}: only valid for kind \"known_variance\"",
                    field("known_sigmas")
                );
            }
            Ok(())
        };
        let spec = match self.kind.as_str() {
            "chk" => PolicySpec::Chk,
            "bk" => PolicySpec::Bk,
            "acf" => PolicySpec::Acf,
            "greedy" => PolicySpec::Greedy,
            "ts" => {
                no_sigmas()?;
                let alpha = self
                    .alpha
                    .ok_or_else(|| anyhow!("{}: required for kind \"ts\"", field("alpha")))?;
                return Ok(PolicySpec::Thompson { alpha });
            }
            "known_variance" => {
                no_alpha()?;
                let sigmas = self.known_sigmas.clone().ok_or_else(|| {
                    anyhow!("{}: required for kind \"known_variance\"", field("known_sigmas"))
                })?;
                return Ok(PolicySpec::KnownVariance { sigmas });
            }
            other => bail!(
                "{}: unknown kind {other:?}; expected one of chk, bk, acf, known_variance, ts, greedy",
                field("kind")
            ),
        };
        no_alpha()?;
        no_sigmas()?;
        Ok(spec)
    }
}

impl ConfigFile {
    pub fn instance(&self) -> Result<BanditInstance> {
        BanditInstance::new(self.instance.means.clone(), self.instance.variances.clone())
            .map_err(|e| anyhow!("field `instance`: {e}"))
    }

    pub fn horizon(&self, o: &Overrides) -> Result<u64> {
        o.horizon.or(self.horizon).ok_or_else(|| {
            anyhow!("field `horizon`: missing (set it in the config or pass --horizon)")
        })
    }

    /// Logged times: the configured grid, or the default grid for the horizon.
    pub fn times(&self, o: &Overrides) -> Result<Vec<u64>> {
        if self.log_grid.is_empty() {
            Ok(default_log_grid(self.horizon(o)?))
        } else {
            Ok(self.log_grid.clone())
        }
    }

    pub fn experiment(&self, o: &Overrides) -> Result<ExperimentConfig> {
        let instance = self.instance()?;
        if self.policies.is_empty() {
            bail!("field `policies`: at least one policy is required");
        }
        let policies = self
            .policies
            .iter()
            .enumerate()
            .map(|(i, p)| p.to_spec(i))
            .collect::<Result<Vec<_>>>()?;
        for (i, p) in policies.iter().enumerate() {
            p.validate(instance.n_arms())
                .map_err(|e| anyhow!("field `policies[{i}]`: {e}"))?;
        }
        let horizon = self.horizon(o)?;
        let replications = o.replications.or(self.replications).ok_or_else(|| {
            anyhow!("field `replications`: missing (set it in the config or pass --replications)")
        })?;
        let seed = o.seed.or(self.seed).unwrap_or(0);
        ExperimentConfig::new(
            instance,
            policies,
            horizon,
            replications,
            seed,
            self.log_grid.clone(),
        )
        .map_err(|e| anyhow!("{e}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"{
        "instance": {"means": [1.0, 0.0], "variances": [1.0, 2.0]},
        "policies": [{"kind": "chk"}, {"kind": "ts", "alpha": -1.0},
                     {"kind": "known_variance", "known_sigmas": [1.0, 1.5]}],
        "horizon": 100, "replications": 4, "seed": 9
    }"#;

    #[test]
    fn parses_and_builds() {
        let c = parse(GOOD).unwrap();
        let e = c.experiment(&Overrides::default()).unwrap();
        assert_eq!(e.policies.len(), 3);
        assert_eq!(e.seed, 9);
        assert_eq!(*e.log_grid.last().unwrap(), 100);
        let o = Overrides {
            seed: Some(1),
            replications: Some(2),
            horizon: Some(200),
        };
        let e = c.experiment(&o).unwrap();
        assert_eq!((e.seed, e.replications, e.horizon), (1, 2, 200));
    }

    #[test]
    fn unknown_key_reports_position() {
        let err = parse(
            "{\n  \"instance\": {\"means\": [1, 0], \"variances\": [1, 1]},\n  \"horizen\": 5\n}",
        )
        .unwrap_err()
        .to_string();
        assert!(err.contains("horizen"), "{err}");
        assert!(err.contains("line 3"), "{err}");
    }

    #[test]
    fn field_diagnostics() {
        let bad_alpha = GOOD.replace("\"alpha\": -1.0", "\"alpha\": 0.5");
        let err = parse(&bad_alpha)
            .unwrap()
            .experiment(&Overrides::default())
            .unwrap_err();
        assert!(err.to_string().contains("policies[1]"), "{err}");

        let bad_kind = GOOD.replace("\"chk\"", "\"ucb\"");
        let err = parse(&bad_kind)
            .unwrap()
            .experiment(&Overrides::default())
            .unwrap_err();
        assert!(err.to_string().contains("policies[0].kind"), "{err}");

        let bad_var = GOOD.replace("[1.0, 2.0]", "[1.0, -2.0]");
        let err = parse(&bad_var)
            .unwrap()
            .experiment(&Overrides::default())
            .unwrap_err();
        assert!(err.to_string().contains("instance"), "{err}");
    }
}
