use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hyperparameters shared by every clause pool of a machine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperParams {
    /// Clauses per class; half vote for the class, half against.
    pub clauses_per_class: usize,
    /// Voting target: class sums are clipped to `[-threshold, threshold]` during training.
    pub threshold: u32,
    /// Larger values produce finer, less frequent patterns. Must exceed 1.
    pub specificity: f64,
    /// States per action; each automaton moves within `1..=2 * ta_states`.
    pub ta_states: u32,
    /// Replace the `(s - 1) / s` include-reward probability by 1.
    #[serde(default)]
    pub boost_true_positives: bool,
    pub epochs: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams {
            clauses_per_class: 20,
            threshold: 15,
            specificity: 3.9,
            ta_states: 100,
            boost_true_positives: false,
            epochs: 50,
            seed: 0,
        }
    }
}

impl HyperParams {
    pub fn validate(&self) -> Result<()> {
        if self.clauses_per_class == 0 {
            return Err(Error::config("clauses_per_class", "must be positive"));
        }
        if !self.clauses_per_class.is_multiple_of(2) {
            return Err(Error::config("clauses_per_class", "must be even"));
        }
        if self.threshold == 0 {
            return Err(Error::config("threshold", "must be at least 1"));
        }
        if !self.specificity.is_finite() || self.specificity <= 1.0 {
            return Err(Error::config("specificity", "must exceed 1"));
        }
        if self.ta_states == 0 {
            return Err(Error::config("ta_states", "must be at least 1"));
        }
        if self.ta_states > u32::MAX / 2 {
            return Err(Error::config("ta_states", "is too large"));
        }
        Ok(())
    }

    /// Stable hex digest of the parameter set.
    pub fn fingerprint(&self) -> String {
        // FNV-1a over the canonical JSON form.
        let text = serde_json::to_string(self).expect("params serialize");
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in text.bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        format!("{h:016x}")
    }
}
