//! Experiment configuration files (TOML). Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    SweepK,
    ComptronRun,
    Lowerbound,
    Prop2,
    Robust,
    BoundAudit,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::SweepK => "sweep-k",
            ExperimentKind::ComptronRun => "comptron-run",
            ExperimentKind::Lowerbound => "lowerbound",
            ExperimentKind::Prop2 => "prop2",
            ExperimentKind::Robust => "robust",
            ExperimentKind::BoundAudit => "bound-audit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Generator {
    /// Points on the line with random weights, gaps and labels.
    Random,
    Theorem2,
    Prop2,
}

/// Where the instance comes from: a JSON file or a named generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<Generator>,
    /// Support size for the random generator.
    #[serde(default = "default_points")]
    pub n: usize,
}

impl Default for InstanceSource {
    fn default() -> Self {
        Self { path: None, generator: None, n: default_points() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModulusSetting {
    #[default]
    Exact,
    Search,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobustSection {
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_iterations")]
    pub max_iterations: usize,
    #[serde(default)]
    pub modulus: ModulusSetting,
    /// Grid steps per coordinate for the search modulus.
    #[serde(default = "default_grid")]
    pub grid: u32,
    /// Largest number of canonical queries the polytope may enumerate.
    #[serde(default = "default_query_cap")]
    pub query_cap: u64,
}

impl Default for RobustSection {
    fn default() -> Self {
        Self {
            tolerance: default_tolerance(),
            max_iterations: default_iterations(),
            modulus: ModulusSetting::default(),
            grid: default_grid(),
            query_cap: default_query_cap(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Oracle orders. Comptron experiments need powers of two.
    #[serde(default = "default_orders")]
    pub k: Vec<usize>,
    #[serde(default)]
    pub eta: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Record wall-clock time per trial; `false` writes 0 so reruns are
    /// byte-identical.
    #[serde(default = "default_true")]
    pub timing: bool,
    #[serde(default)]
    pub instance: InstanceSource,
    #[serde(default)]
    pub robust: RobustSection,
    #[serde(default = "default_out")]
    pub out: PathBuf,
}

fn default_points() -> usize {
    8
}
fn default_tolerance() -> f64 {
    1e-6
}
fn default_iterations() -> usize {
    500
}
fn default_grid() -> u32 {
    64
}
fn default_query_cap() -> u64 {
    10_000
}
fn default_trials() -> usize {
    1
}
fn default_orders() -> Vec<usize> {
    vec![4, 8, 16, 32]
}
fn default_delta() -> f64 {
    0.05
}
fn default_true() -> bool {
    true
}
fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        Self {
            experiment,
            seed: 0,
            trials: default_trials(),
            k: default_orders(),
            eta: 0.0,
            delta: default_delta(),
            timing: true,
            instance: InstanceSource::default(),
            robust: RobustSection::default(),
            out: default_out(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let config: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let fail = |msg: String| Err(CliError::Config(msg));
        if self.trials == 0 {
            return fail("trials must be at least 1".into());
        }
        if !(0.0..0.5).contains(&self.eta) {
            return fail(format!("eta = {} must satisfy 0 <= eta < 1/2", self.eta));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return fail(format!("delta = {} must lie in (0, 1)", self.delta));
        }
        if self.k.is_empty() {
            return fail("k must list at least one order".into());
        }
        if let Some(&k) = self.k.iter().find(|&&k| k == 0) {
            return fail(format!("order k = {k} must be positive"));
        }
        let comptron = matches!(
            self.experiment,
            ExperimentKind::SweepK | ExperimentKind::ComptronRun | ExperimentKind::BoundAudit | ExperimentKind::Prop2
        );
        if comptron {
            if let Some(&k) = self.k.iter().find(|&&k| k < 2 || !k.is_power_of_two()) {
                return fail(format!("order k = {k}: Comptron experiments need powers of two >= 2"));
            }
        }
        if self.experiment == ExperimentKind::Lowerbound && self.k.iter().any(|&k| k < 2) {
            return fail("lowerbound needs k >= 2".into());
        }
        if self.experiment == ExperimentKind::Prop2 && self.k.iter().any(|&k| k <= 10) {
            return fail("prop2 needs k > 10".into());
        }
        if self.instance.path.is_some() && self.instance.generator.is_some() {
            return fail("instance: give either path or generator, not both".into());
        }
        if self.instance.n == 0 {
            return fail("instance.n must be positive".into());
        }
        if self.robust.tolerance.is_nan() || self.robust.tolerance <= 0.0 {
            return fail("robust.tolerance must be positive".into());
        }
        if self.robust.grid == 0 {
            return fail("robust.grid must be positive".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let c = ExperimentConfig::from_toml("experiment = \"sweep-k\"\n").unwrap();
        assert_eq!(c.k, vec![4, 8, 16, 32]);
        assert_eq!(c.trials, 1);
        assert!(c.timing);
        assert_eq!(c.instance.n, 8);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = ExperimentConfig::from_toml("experiment = \"sweep-k\"\ntrails = 3\n").unwrap_err();
        assert!(matches!(err, CliError::Config(_)));
        let err = ExperimentConfig::from_toml("experiment = \"sweep-k\"\n[instance]\nsize = 3\n").unwrap_err();
        assert!(matches!(err, CliError::Config(_)));
    }

    #[test]
    fn invalid_values() {
        for text in [
            "experiment = \"sweep-k\"\neta = 0.5\n",
            "experiment = \"sweep-k\"\ntrials = 0\n",
            "experiment = \"sweep-k\"\ndelta = 1.0\n",
            "experiment = \"prop2\"\nk = [8]\n",
            "experiment = \"sweep-k\"\nk = [4, 6]\n",
            "experiment = \"nope\"\n",
        ] {
            assert!(matches!(ExperimentConfig::from_toml(text), Err(CliError::Config(_))), "{text}");
        }
    }

    #[test]
    fn round_trip() {
        let mut c = ExperimentConfig::new(ExperimentKind::Robust);
        c.instance.generator = Some(Generator::Theorem2);
        c.k = vec![2];
        let back = ExperimentConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(back, c);
    }
}
