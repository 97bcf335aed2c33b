use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::environment::RpcFlatConfig;
use crate::error::{Error, Result};
use crate::learner::LearnerConfig;

/// Overrides `output_dir` of every experiment when set.
pub const OUTPUT_DIR_ENV: &str = "ALP_OUTPUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    /// `trace.jsonl`: one record per step.
    Trace,
    /// `steps.csv`: per-step scalars.
    Csv,
    /// `model.toml`: the final model.
    Model,
    /// `metrics.json`.
    Metrics,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_reports() -> Vec<ReportFormat> {
    vec![ReportFormat::Trace, ReportFormat::Csv, ReportFormat::Model, ReportFormat::Metrics]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Model file, relative to the config file.
    pub model: PathBuf,
    /// Start from single-value domains, no constraints and no rules, keeping
    /// only the variables and sensors of the model file.
    #[serde(default)]
    pub from_scratch: bool,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_reports")]
    pub reports: Vec<ReportFormat>,
    #[serde(default)]
    pub environment: RpcFlatConfig,
    #[serde(default)]
    pub learner: LearnerConfig,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(vec![e.message().trim().to_string()]))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file and makes its paths relative to the working
    /// directory.
    pub fn read(path: &Path) -> Result<Self> {
        let mut cfg = Self::parse(&std::fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new(""));
        if cfg.model.is_relative() {
            cfg.model = base.join(&cfg.model);
        }
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configs always serialize")
    }

    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.model.as_os_str().is_empty() {
            out.push("model: path is empty".to_string());
        }
        if self.reports.is_empty() {
            out.push("reports: at least one format is required".to_string());
        }
        out.extend(self.environment.problems("environment."));
        out.extend(self.learner.problems("learner."));
        out
    }

    pub fn validate(&self) -> Result<()> {
        let problems = self.problems();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems))
        }
    }

    pub fn wants(&self, format: ReportFormat) -> bool {
        self.reports.contains(&format)
    }

    /// `output_dir`, unless [`OUTPUT_DIR_ENV`] is set.
    pub fn resolved_output_dir(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.output_dir.clone(),
        }
    }

    /// The same experiment with both random streams derived from `seed`.
    pub fn with_seed(&self, seed: u64) -> Self {
        let mut cfg = self.clone();
        cfg.learner.seed = seed;
        cfg.environment.seed = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(1);
        cfg
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_in() {
        let cfg = ExperimentConfig::parse("model = \"m.toml\"\n").unwrap();
        assert_eq!(cfg.learner, LearnerConfig::default());
        assert_eq!(cfg.reports.len(), 4);
        assert_eq!(ExperimentConfig::parse(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn every_problem_is_listed() {
        let text = "model = \"\"\nreports = []\n[environment]\nrobot = \"Z\"\nsigma = -1.0\n[learner]\nalpha = 3.0\n";
        let Err(Error::Config(problems)) = ExperimentConfig::parse(text) else {
            panic!("expected config error")
        };
        assert_eq!(problems.len(), 5, "{problems:?}");
        assert!(problems.iter().any(|p| p.starts_with("environment.robot")));
        assert!(problems.iter().any(|p| p.starts_with("learner.alpha")));
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(matches!(
            ExperimentConfig::parse("model = \"m\"\nmodle = 1\n"),
            Err(Error::Config(_))
        ));
    }
}
