use serde::Serialize;

use super::clause::{Clause, EvalMode, Literals, Polarity};
use super::params::HyperParams;
use crate::data::{default_feature_names, BinaryDataset};
use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::rng::Stream;

/// `v` clipped to `[-t, t]`.
pub fn clip_sum(v: i64, t: i64) -> i64 {
    v.clamp(-t, t)
}

/// Weighted Tsetlin Machine with one clause pool per class.
///
/// Each pool holds `m` clauses; the first `m/2` vote for the class, the rest
/// against it. Training presents every example to the pool of its own class
/// as a positive example and to one other pool as a negative example.
#[derive(Debug, Clone, PartialEq)]
pub struct TsetlinMachine {
    params: HyperParams,
    features: usize,
    feature_names: Vec<String>,
    classes: Vec<u32>,
    pools: Vec<Vec<Clause>>,
}

/// Per-class clause activity for one sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassTrace {
    pub class: u32,
    /// Clauses firing (inference mode).
    pub clause_cnt: usize,
    /// Firing clauses of positive polarity.
    pub positive_cnt: usize,
    /// Weighted vote of the pool.
    pub clause_sum: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecisionTrace {
    pub classes: Vec<ClassTrace>,
    /// `|clause_sum_0 - clause_sum_1|`; present for two-class machines only.
    pub asd: Option<u64>,
    pub predicted: u32,
}

impl TsetlinMachine {
    pub fn new(params: HyperParams, features: usize, classes: &[u32], stream: &mut Stream) -> Result<Self> {
        params.validate()?;
        check_shape(features, classes)?;
        let m = params.clauses_per_class;
        let pools = classes
            .iter()
            .map(|_| {
                (0..m)
                    .map(|j| Clause::random(polarity_of(j, m), features, params.ta_states, stream))
                    .collect()
            })
            .collect();
        Ok(TsetlinMachine {
            params,
            features,
            feature_names: default_feature_names(features),
            classes: classes.to_vec(),
            pools,
        })
    }

    /// Assembles a machine from explicit pools, checking every structural invariant.
    pub fn from_pools(
        params: HyperParams,
        feature_names: Vec<String>,
        classes: Vec<u32>,
        pools: Vec<Vec<Clause>>,
    ) -> Result<Self> {
        params.validate()?;
        let features = feature_names.len();
        check_shape(features, &classes)?;
        if pools.len() != classes.len() {
            return Err(Error::Format(format!("{} pools for {} classes", pools.len(), classes.len())));
        }
        let m = params.clauses_per_class;
        for (c, pool) in pools.iter().enumerate() {
            if pool.len() != m {
                return Err(Error::Format(format!("pool {c} has {} clauses, expected {m}", pool.len())));
            }
            for (j, clause) in pool.iter().enumerate() {
                if clause.features() != features {
                    return Err(Error::Dimension { expected: features, got: clause.features() });
                }
                if clause.polarity() != polarity_of(j, m) {
                    return Err(Error::Format(format!("pool {c} clause {j} has the wrong polarity")));
                }
                if clause.states().iter().any(|&s| s > 2 * params.ta_states) {
                    return Err(Error::Format(format!("pool {c} clause {j} exceeds 2N")));
                }
            }
        }
        Ok(TsetlinMachine { params, features, feature_names, classes, pools })
    }

    pub fn params(&self) -> &HyperParams {
        &self.params
    }

    pub fn num_features(&self) -> usize {
        self.features
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn set_feature_names(&mut self, names: Vec<String>) -> Result<()> {
        if names.len() != self.features {
            return Err(Error::Dimension { expected: self.features, got: names.len() });
        }
        self.feature_names = names;
        Ok(())
    }

    pub fn classes(&self) -> &[u32] {
        &self.classes
    }

    pub fn pools(&self) -> &[Vec<Clause>] {
        &self.pools
    }

    pub fn class_index(&self, label: u32) -> Result<usize> {
        self.classes.iter().position(|&c| c == label).ok_or(Error::UnknownClass(label))
    }

    pub fn pool(&self, label: u32) -> Result<&[Clause]> {
        Ok(&self.pools[self.class_index(label)?])
    }

    fn pack(&self, x: &[u8]) -> Result<Literals> {
        if x.len() != self.features {
            return Err(Error::Dimension { expected: self.features, got: x.len() });
        }
        Ok(Literals::pack(x))
    }

    fn pool_sum(pool: &[Clause], lits: &Literals, mode: EvalMode) -> i64 {
        pool.iter()
            .filter(|c| c.eval(lits, mode))
            .map(|c| c.polarity().sign() * i64::from(c.weight()))
            .sum()
    }

    /// Weighted vote of the class's pool at inference.
    pub fn class_sum(&self, class: u32, x: &[u8]) -> Result<i64> {
        let lits = self.pack(x)?;
        Ok(Self::pool_sum(self.pool(class)?, &lits, EvalMode::Inference))
    }

    fn sums(&self, lits: &Literals) -> Vec<i64> {
        self.pools.iter().map(|p| Self::pool_sum(p, lits, EvalMode::Inference)).collect()
    }

    fn decide(&self, sums: &[i64]) -> u32 {
        if sums.len() == 2 {
            // unit step on the class-1 margin: ties go to class 1
            return if sums[1] - sums[0] >= 0 { self.classes[1] } else { self.classes[0] };
        }
        let mut best = 0;
        for (i, &s) in sums.iter().enumerate() {
            if s > sums[best] {
                best = i;
            }
        }
        self.classes[best]
    }

    /// Two classes: the second class wins when its sum is at least the first's.
    /// More classes: highest sum, ties to the lowest class index.
    pub fn classify(&self, x: &[u8]) -> Result<u32> {
        let lits = self.pack(x)?;
        Ok(self.decide(&self.sums(&lits)))
    }

    pub fn predict_batch(&self, data: &BinaryDataset, exec: Execution) -> Result<Vec<u32>> {
        self.check_width(data)?;
        Ok(par::map_slice(exec, data.rows(), |row| self.decide(&self.sums(&Literals::pack(row)))))
    }

    pub fn accuracy(&self, data: &BinaryDataset) -> Result<f64> {
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let pred = self.predict_batch(data, Execution::default())?;
        let hits = pred.iter().zip(data.labels()).filter(|(p, y)| p == y).count();
        Ok(hits as f64 / data.len() as f64)
    }

    pub fn decision_trace(&self, x: &[u8]) -> Result<DecisionTrace> {
        let lits = self.pack(x)?;
        let classes: Vec<ClassTrace> = self
            .pools
            .iter()
            .zip(&self.classes)
            .map(|(pool, &class)| {
                let mut t = ClassTrace { class, clause_cnt: 0, positive_cnt: 0, clause_sum: 0 };
                for c in pool.iter().filter(|c| c.eval(&lits, EvalMode::Inference)) {
                    t.clause_cnt += 1;
                    if c.polarity() == Polarity::Positive {
                        t.positive_cnt += 1;
                    }
                    t.clause_sum += c.polarity().sign() * i64::from(c.weight());
                }
                t
            })
            .collect();
        let sums: Vec<i64> = classes.iter().map(|t| t.clause_sum).collect();
        let asd = (sums.len() == 2).then(|| sums[0].abs_diff(sums[1]));
        Ok(DecisionTrace { predicted: self.decide(&sums), classes, asd })
    }

    pub fn trace_batch(&self, data: &BinaryDataset, exec: Execution) -> Result<Vec<DecisionTrace>> {
        self.check_width(data)?;
        par::map_slice(exec, data.rows(), |row| self.decision_trace(row)).into_iter().collect()
    }

    /// One training presentation.
    ///
    /// Draw order: with more than two classes, one draw picks the negative
    /// pool; then the target pool, then the negative pool, are updated.
    pub fn train_example(&mut self, x: &[u8], y: u32, stream: &mut Stream) -> Result<()> {
        let lits = self.pack(x)?;
        let target = self.class_index(y)?;
        self.train_packed(&lits, target, stream);
        Ok(())
    }

    fn train_packed(&mut self, lits: &Literals, target: usize, stream: &mut Stream) {
        let k = self.classes.len();
        let other = if k == 2 {
            1 - target
        } else {
            let r = stream.below(k - 1);
            if r >= target {
                r + 1
            } else {
                r
            }
        };
        update_pool(&mut self.pools[target], lits, true, &self.params, stream);
        update_pool(&mut self.pools[other], lits, false, &self.params, stream);
    }

    /// Runs `params.epochs` passes, each over a freshly shuffled row order.
    pub fn fit(&mut self, data: &BinaryDataset, stream: &mut Stream) -> Result<()> {
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        self.check_width(data)?;
        let targets: Vec<usize> =
            data.labels().iter().map(|&y| self.class_index(y)).collect::<Result<_>>()?;
        let packed: Vec<Literals> = data.rows().iter().map(|r| Literals::pack(r)).collect();
        let mut order: Vec<usize> = (0..data.len()).collect();
        for _ in 0..self.params.epochs {
            stream.shuffle(&mut order);
            for &i in &order {
                self.train_packed(&packed[i], targets[i], stream);
            }
        }
        Ok(())
    }

    fn check_width(&self, data: &BinaryDataset) -> Result<()> {
        if data.num_features() != self.features {
            return Err(Error::Dimension { expected: self.features, got: data.num_features() });
        }
        Ok(())
    }
}

/// Builds and fits a machine whose classes are those present in `data`
/// (or `classes` when given). Initialization and training use separate substreams.
pub fn train_model(
    params: &HyperParams,
    data: &BinaryDataset,
    classes: Option<&[u32]>,
    stream: &Stream,
) -> Result<TsetlinMachine> {
    let owned;
    let classes = match classes {
        Some(c) => c,
        None => {
            owned = data.classes();
            &owned
        }
    };
    let mut init = stream.substream(crate::rng::stage::INIT);
    let mut tm = TsetlinMachine::new(params.clone(), data.num_features(), classes, &mut init)?;
    tm.set_feature_names(data.feature_names().to_vec())?;
    tm.fit(data, &mut stream.substream(crate::rng::stage::TRAIN))?;
    Ok(tm)
}

fn polarity_of(j: usize, m: usize) -> Polarity {
    if j < m / 2 {
        Polarity::Positive
    } else {
        Polarity::Negative
    }
}

fn check_shape(features: usize, classes: &[u32]) -> Result<()> {
    if features == 0 {
        return Err(Error::config("num_features", "must be at least 1"));
    }
    if classes.len() < 2 {
        return Err(Error::config("classes", "need at least two labels"));
    }
    let mut sorted = classes.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != classes.len() {
        return Err(Error::config("classes", "labels must be distinct"));
    }
    Ok(())
}

/// One pool's share of a training step.
///
/// The pool votes on `lits` in training mode; the clipped vote sets the
/// feedback probability `eps / 2T`, with `eps = T - v` for a positive
/// example and `T + v` otherwise. Each clause then takes one gate draw, in
/// pool order; clauses that pass receive Type I when their polarity agrees
/// with the example and Type II otherwise. No draws are taken when `eps = 0`.
pub(crate) fn update_pool(
    pool: &mut [Clause],
    lits: &Literals,
    positive_example: bool,
    params: &HyperParams,
    stream: &mut Stream,
) {
    let t = i64::from(params.threshold);
    let v = clip_sum(TsetlinMachine::pool_sum(pool, lits, EvalMode::Training), t);
    let eps = if positive_example { t - v } else { t + v };
    if eps == 0 {
        return;
    }
    let p = eps as f64 / (2 * t) as f64;
    for clause in pool.iter_mut() {
        if stream.unit() < p {
            let agrees = (clause.polarity() == Polarity::Positive) == positive_example;
            if agrees {
                clause.type_i(lits, params.specificity, params.boost_true_positives, stream);
            } else {
                clause.type_ii(lits);
            }
        }
    }
}
