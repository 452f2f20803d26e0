//! Flat run configuration read from TOML files and overridden by flags.

use std::path::Path;

use serde::Deserialize;

use crate::data::Scenario;
use crate::error::{Error, Result};
use crate::forest::{ForestConfig, MaxDepth};
use crate::splitting::{FamilyKind, SplitFamily};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum DepthSetting {
    Limit(usize),
    Named(String),
}

/// Every key is optional; unset keys take the library defaults.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub family: Option<String>,
    pub quad_lambda: Option<f64>,
    pub nn_hidden_widths: Option<Vec<usize>>,
    pub threshold_kind: Option<String>,
    pub eta: Option<f64>,
    pub n_trees: Option<usize>,
    pub subsample: Option<usize>,
    pub max_depth: Option<DepthSetting>,
    pub seed: Option<u64>,
    pub scenario: Option<String>,
    pub contamination: Option<f64>,
    pub runs: Option<usize>,
}

/// A validated [`RunConfig`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub forest: ForestConfig,
    pub scenario: Scenario,
    pub contamination: Option<f64>,
    pub runs: usize,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(e.message().to_string()))
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| Error::config(format!("{}: {e}", path.display())))
    }

    /// Keys set in `overrides` replace the ones in `self`.
    pub fn merge(self, overrides: RunConfig) -> RunConfig {
        RunConfig {
            family: overrides.family.or(self.family),
            quad_lambda: overrides.quad_lambda.or(self.quad_lambda),
            nn_hidden_widths: overrides.nn_hidden_widths.or(self.nn_hidden_widths),
            threshold_kind: overrides.threshold_kind.or(self.threshold_kind),
            eta: overrides.eta.or(self.eta),
            n_trees: overrides.n_trees.or(self.n_trees),
            subsample: overrides.subsample.or(self.subsample),
            max_depth: overrides.max_depth.or(self.max_depth),
            seed: overrides.seed.or(self.seed),
            scenario: overrides.scenario.or(self.scenario),
            contamination: overrides.contamination.or(self.contamination),
            runs: overrides.runs.or(self.runs),
        }
    }

    /// Validates every value. `dim`, when known, also checks family constraints.
    pub fn resolve(&self, dim: Option<usize>) -> Result<RunSettings> {
        let defaults = ForestConfig::default();
        let kind = match &self.family {
            Some(name) => name.parse::<FamilyKind>()?,
            None => defaults.family.kind,
        };
        let family = SplitFamily {
            kind,
            quad_lambda: self.quad_lambda.unwrap_or(defaults.family.quad_lambda),
            nn_hidden_widths: self.nn_hidden_widths.clone().unwrap_or_default(),
        };
        let max_depth = match &self.max_depth {
            None => MaxDepth::Auto,
            Some(DepthSetting::Limit(d)) => MaxDepth::Limit(*d),
            Some(DepthSetting::Named(s)) if s == "auto" => MaxDepth::Auto,
            Some(DepthSetting::Named(s)) => match s.parse() {
                Ok(d) => MaxDepth::Limit(d),
                Err(_) => return Err(Error::config(format!("max_depth must be a positive integer or \"auto\", got `{s}`"))),
            },
        };
        let forest = ForestConfig {
            n_trees: self.n_trees.unwrap_or(defaults.n_trees),
            subsample_size: self.subsample.unwrap_or(defaults.subsample_size),
            max_depth,
            family,
            threshold: match &self.threshold_kind {
                Some(s) => s.parse()?,
                None => defaults.threshold,
            },
            eta: self.eta.unwrap_or(defaults.eta),
            seed: self.seed.unwrap_or(defaults.seed),
            max_resample_attempts: defaults.max_resample_attempts,
        };
        // family checks that need a dimension run once it is known
        forest.validate(dim.unwrap_or(match kind {
            FamilyKind::Sine => 2,
            _ => 1,
        }))?;
        let scenario = match &self.scenario {
            Some(s) => s.parse()?,
            None => Scenario::Contaminated,
        };
        if let Some(p) = self.contamination {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::config(format!("contamination must lie in (0, 1), got {p}")));
            }
        }
        let runs = self.runs.unwrap_or(1);
        if runs == 0 {
            return Err(Error::config("runs must be at least 1"));
        }
        Ok(RunSettings {
            forest,
            scenario,
            contamination: self.contamination,
            runs,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_keys() {
        let cfg = RunConfig::from_toml(
            r#"
            family = "quad"
            quad_lambda = 100.0
            threshold_kind = "normal"
            eta = 2.0
            n_trees = 50
            subsample = 128
            max_depth = "auto"
            seed = 7
            scenario = "II"
            contamination = 0.1
            runs = 10
            "#,
        )
        .unwrap();
        let s = cfg.resolve(Some(6)).unwrap();
        assert_eq!(s.forest.family, SplitFamily::quadric(100.0));
        assert_eq!(s.forest.n_trees, 50);
        assert_eq!(s.forest.subsample_size, 128);
        assert_eq!(s.forest.eta, 2.0);
        assert_eq!(s.forest.seed, 7);
        assert_eq!(s.scenario, Scenario::InliersOnly);
        assert_eq!(s.contamination, Some(0.1));
        assert_eq!(s.runs, 10);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(RunConfig::from_toml("trees = 5"), Err(Error::Config(_))));
    }

    #[test]
    fn values_are_validated() {
        let bad = [
            "family = \"forest\"",
            "threshold_kind = \"beta\"",
            "eta = -1.0",
            "n_trees = 0",
            "subsample = 1",
            "max_depth = 0",
            "max_depth = \"deep\"",
            "scenario = \"III\"",
            "contamination = 1.5",
            "runs = 0",
            "family = \"quad\"\nquad_lambda = 0.0",
        ];
        for text in bad {
            let cfg = RunConfig::from_toml(text).unwrap();
            assert!(cfg.resolve(Some(3)).is_err(), "{text}");
        }
        let sine = RunConfig::from_toml("family = \"sine\"").unwrap();
        assert!(sine.resolve(Some(3)).is_err());
        assert!(sine.resolve(Some(2)).is_ok());
    }

    #[test]
    fn flags_win() {
        let file = RunConfig::from_toml("family = \"if\"\nseed = 3").unwrap();
        let flags = RunConfig {
            family: Some("hif".into()),
            ..RunConfig::default()
        };
        let merged = file.merge(flags);
        assert_eq!(merged.family.as_deref(), Some("hif"));
        assert_eq!(merged.seed, Some(3));
    }

    #[test]
    fn defaults() {
        let s = RunConfig::default().resolve(None).unwrap();
        assert_eq!(s.forest, ForestConfig::default());
        assert_eq!(s.scenario, Scenario::Contaminated);
        assert_eq!(s.runs, 1);
    }
}
