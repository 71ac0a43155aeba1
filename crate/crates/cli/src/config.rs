//! Run configuration: a TOML file, overridden field by field by command-line flags.

use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use tmfusion::fusion::{ChangeConfig, LocalizeConfig};
use tmfusion::sampling::StrategyKind;
use tmfusion::HyperParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub clauses: usize,
    pub threshold: u32,
    pub specificity: f64,
    pub ta_states: u32,
    pub boost: bool,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        let p = HyperParams::default();
        ModelConfig {
            clauses: p.clauses_per_class,
            threshold: p.threshold,
            specificity: p.specificity,
            ta_states: p.ta_states,
            boost: p.boost_true_positives,
            epochs: p.epochs,
            seed: p.seed,
        }
    }
}

impl ModelConfig {
    pub fn params(&self) -> HyperParams {
        HyperParams {
            clauses_per_class: self.clauses,
            threshold: self.threshold,
            specificity: self.specificity,
            ta_states: self.ta_states,
            boost_true_positives: self.boost,
            epochs: self.epochs,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CutsConfig {
    pub count: usize,
    pub fraction: f64,
    pub remove: usize,
}

impl Default for CutsConfig {
    fn default() -> Self {
        let d = LocalizeConfig::default();
        CutsConfig { count: d.cuts, fraction: d.fraction, remove: d.remove }
    }
}

impl CutsConfig {
    pub fn localize(&self) -> LocalizeConfig {
        LocalizeConfig { cuts: self.count, remove: self.remove, fraction: self.fraction }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OversampleConfig {
    pub strategy: StrategyKind,
    pub ratio: f64,
    pub k_neighbors: usize,
    pub folds: usize,
    pub repeats: usize,
}

impl Default for OversampleConfig {
    fn default() -> Self {
        OversampleConfig { strategy: StrategyKind::MaxAsd, ratio: 1.0, k_neighbors: 5, folds: 10, repeats: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChangeSection {
    pub theta: f64,
    pub match_threshold: f64,
    pub weight_ratio: f64,
}

impl Default for ChangeSection {
    fn default() -> Self {
        let c = ChangeConfig::new(0.9);
        ChangeSection { theta: c.theta, match_threshold: c.match_threshold, weight_ratio: c.weight_ratio }
    }
}

impl ChangeSection {
    pub fn change(&self) -> ChangeConfig {
        ChangeConfig { theta: self.theta, match_threshold: self.match_threshold, weight_ratio: self.weight_ratio }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub cuts: CutsConfig,
    pub oversample: OversampleConfig,
    pub change: ChangeSection,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Rejects values the library would refuse later, naming the key.
    pub fn validate(&self) -> Result<()> {
        self.model.params().validate()?;
        let c = &self.cuts;
        anyhow::ensure!(c.count >= 1, "invalid configuration: cuts.count must be at least 1");
        anyhow::ensure!(c.fraction > 0.0 && c.fraction <= 1.0, "invalid configuration: cuts.fraction must be in (0, 1]");
        anyhow::ensure!(c.remove <= c.count, "invalid configuration: cuts.remove must not exceed cuts.count");
        let o = &self.oversample;
        anyhow::ensure!(o.ratio > 0.0 && o.ratio <= 1.0, "invalid configuration: oversample.ratio must be in (0, 1]");
        anyhow::ensure!(o.k_neighbors >= 1, "invalid configuration: oversample.k_neighbors must be at least 1");
        anyhow::ensure!(o.folds >= 2, "invalid configuration: oversample.folds must be at least 2");
        anyhow::ensure!(o.repeats >= 1, "invalid configuration: oversample.repeats must be at least 1");
        let ch = &self.change;
        anyhow::ensure!(ch.theta > 0.0 && ch.theta < 1.0, "invalid configuration: change.theta must be in (0, 1)");
        anyhow::ensure!(
            (0.0..=1.0).contains(&ch.match_threshold),
            "invalid configuration: change.match_threshold must be in [0, 1]"
        );
        anyhow::ensure!(ch.weight_ratio >= 1.0, "invalid configuration: change.weight_ratio must be at least 1");
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_file_keeps_defaults() {
        let cfg: RunConfig = toml::from_str("[model]\nseed = 7\n[oversample]\nstrategy = \"top25-asd\"\n").unwrap();
        assert_eq!(cfg.model.seed, 7);
        assert_eq!(cfg.model.clauses, ModelConfig::default().clauses);
        assert_eq!(cfg.oversample.strategy, StrategyKind::Top25Asd);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = toml::from_str::<RunConfig>("[model]\nclause = 4\n").unwrap_err().to_string();
        assert!(err.contains("clause"), "{err}");
    }

    #[test]
    fn low_specificity_is_rejected() {
        let mut cfg = RunConfig::default();
        cfg.model.specificity = 0.5;
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("specificity must exceed 1"), "{err}");
    }
}
