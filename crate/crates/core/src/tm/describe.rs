//! Global descriptions: the set of learned clauses, as literal sets with weights.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::clause::Polarity;
use super::machine::TsetlinMachine;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClauseRecord {
    pub class: u32,
    pub polarity: Polarity,
    /// Included literal indices, ascending; `k >= f` denotes `NOT x_(k-f)`.
    pub literals: Vec<usize>,
    pub weight: u32,
    /// No literal is included; the clause never fires at inference.
    pub empty: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlobalDescription {
    pub num_features: usize,
    pub feature_names: Vec<String>,
    pub classes: Vec<u32>,
    pub params_fingerprint: String,
    /// Sorted by class, polarity, literal set, weight.
    pub records: Vec<ClauseRecord>,
}

impl TsetlinMachine {
    pub fn global_description(&self) -> GlobalDescription {
        let mut records: Vec<ClauseRecord> = self
            .classes()
            .iter()
            .zip(self.pools())
            .flat_map(|(&class, pool)| {
                pool.iter().map(move |c| {
                    let literals = c.literals();
                    ClauseRecord {
                        class,
                        polarity: c.polarity(),
                        empty: literals.is_empty(),
                        literals,
                        weight: c.weight(),
                    }
                })
            })
            .collect();
        records.sort_by(|a, b| {
            (a.class, a.polarity, &a.literals, a.weight).cmp(&(b.class, b.polarity, &b.literals, b.weight))
        });
        GlobalDescription {
            num_features: self.num_features(),
            feature_names: self.feature_names().to_vec(),
            classes: self.classes().to_vec(),
            params_fingerprint: self.params().fingerprint(),
            records,
        }
    }
}

impl GlobalDescription {
    pub fn group(&self, class: u32, polarity: Polarity) -> impl Iterator<Item = &ClauseRecord> + '_ {
        self.records.iter().filter(move |r| r.class == class && r.polarity == polarity)
    }

    /// Display name of literal `k`, e.g. `T2_A,N` or `¬T2_A,L`.
    pub fn literal_name(&self, k: usize) -> String {
        let f = self.num_features;
        if k < f {
            self.feature_names[k].clone()
        } else {
            format!("¬{}", self.feature_names[k - f])
        }
    }

    /// Feature index a literal refers to, regardless of negation.
    pub fn literal_feature(&self, k: usize) -> usize {
        k % self.num_features
    }

    pub fn clause_text(&self, record: &ClauseRecord) -> String {
        if record.empty {
            return "(empty)".to_owned();
        }
        record.literals.iter().map(|&k| self.literal_name(k)).collect::<Vec<_>>().join(" ∧ ")
    }

    /// Plain-text table: one line per non-empty clause.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for &class in &self.classes {
            let _ = writeln!(out, "class {class}");
            for pol in [Polarity::Positive, Polarity::Negative] {
                for r in self.group(class, pol).filter(|r| !r.empty) {
                    let _ = writeln!(out, "  {} w={:<5} {}", pol.symbol(), r.weight, self.clause_text(r));
                }
            }
        }
        out
    }
}
