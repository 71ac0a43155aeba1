//! Versioned JSON model documents.
//!
//! A document holds the hyperparameters, class labels, feature names and, per
//! clause in class-then-pool order, its class, polarity, weight and `2f`
//! automaton states. `load(save(m)) == m` exactly.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::clause::{Clause, Polarity};
use super::machine::TsetlinMachine;
use super::params::HyperParams;
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub format_version: u32,
    pub params: HyperParams,
    pub classes: Vec<u32>,
    pub num_features: usize,
    pub feature_names: Vec<String>,
    pub clauses: Vec<ClauseEntry>,
    /// Free-form provenance (effective run config, tool version).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<serde_json::Value>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClauseEntry {
    pub class: u32,
    pub polarity: Polarity,
    pub weight: u32,
    pub states: Vec<u32>,
}

impl ModelDocument {
    pub fn from_model(tm: &TsetlinMachine, provenance: Option<serde_json::Value>) -> Self {
        let clauses = tm
            .classes()
            .iter()
            .zip(tm.pools())
            .flat_map(|(&class, pool)| {
                pool.iter().map(move |c| ClauseEntry {
                    class,
                    polarity: c.polarity(),
                    weight: c.weight(),
                    states: c.states().to_vec(),
                })
            })
            .collect();
        ModelDocument {
            format_version: FORMAT_VERSION,
            params: tm.params().clone(),
            classes: tm.classes().to_vec(),
            num_features: tm.num_features(),
            feature_names: tm.feature_names().to_vec(),
            clauses,
            provenance,
        }
    }

    pub fn into_model(self) -> Result<TsetlinMachine> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported model format_version {} (expected {FORMAT_VERSION})",
                self.format_version
            )));
        }
        if self.feature_names.len() != self.num_features {
            return Err(Error::Dimension { expected: self.num_features, got: self.feature_names.len() });
        }
        let m = self.params.clauses_per_class;
        if self.clauses.len() != m * self.classes.len() {
            return Err(Error::Format(format!(
                "{} clauses for {} classes of {m}",
                self.clauses.len(),
                self.classes.len()
            )));
        }
        let n = self.params.ta_states;
        let mut pools = Vec::with_capacity(self.classes.len());
        for (c, chunk) in self.clauses.chunks(m.max(1)).enumerate() {
            let mut pool = Vec::with_capacity(m);
            for e in chunk {
                if e.class != self.classes[c] {
                    return Err(Error::Format(format!("clause of class {} out of order", e.class)));
                }
                if e.states.len() != 2 * self.num_features {
                    return Err(Error::Dimension { expected: 2 * self.num_features, got: e.states.len() });
                }
                pool.push(Clause::from_states(e.polarity, e.weight, n, e.states.clone())?);
            }
            pools.push(pool);
        }
        TsetlinMachine::from_pools(self.params, self.feature_names, self.classes, pools)
    }
}

pub fn to_json(tm: &TsetlinMachine, provenance: Option<serde_json::Value>) -> String {
    let mut text = serde_json::to_string_pretty(&ModelDocument::from_model(tm, provenance))
        .expect("model document serializes");
    text.push('\n');
    text
}

pub fn from_json(text: &str) -> Result<(TsetlinMachine, Option<serde_json::Value>)> {
    let doc: ModelDocument = serde_json::from_str(text)?;
    let provenance = doc.provenance.clone();
    Ok((doc.into_model()?, provenance))
}

pub fn save(tm: &TsetlinMachine, provenance: Option<serde_json::Value>, path: impl AsRef<Path>) -> Result<()> {
    crate::io::write_atomic(path.as_ref(), to_json(tm, provenance).as_bytes())
}

pub fn load(path: impl AsRef<Path>) -> Result<(TsetlinMachine, Option<serde_json::Value>)> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_json(&text)
}
