//! Comparing learned descriptions and scoring data against models.
//!
//! Two descriptions are compared clause by clause: every clause looks for its
//! best literal-set match (Jaccard) among the clauses of the other description
//! with the same class and polarity. Scores are weighted by clause weight and
//! symmetrized, so identical descriptions score exactly 1.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;

use crate::data::BinaryDataset;
use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::rng::Stream;
use crate::tm::{train_model, ClauseRecord, GlobalDescription, HyperParams, Polarity, TsetlinMachine};

pub const DEFAULT_MATCH_THRESHOLD: f64 = 0.5;
pub const DEFAULT_WEIGHT_RATIO: f64 = 2.0;

/// `|a ∩ b| / |a ∪ b|` over sorted, deduplicated literal sets; two empty sets score 1.
pub fn clause_jaccard(a: &[usize], b: &[usize]) -> f64 {
    let (mut i, mut j, mut inter) = (0, 0, 0usize);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                inter += 1;
                i += 1;
                j += 1;
            }
        }
    }
    let union = a.len() + b.len() - inter;
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchedPair {
    pub a: ClauseRecord,
    pub b: ClauseRecord,
    pub jaccard: f64,
    /// Share of its class's clause weight carried by `a`.
    pub weight_factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilarityReport {
    pub overall: f64,
    pub per_class: BTreeMap<u32, f64>,
    /// Best match of every clause of the first description.
    pub matched_pairs: Vec<MatchedPair>,
}

impl SimilarityReport {
    pub fn render(&self) -> String {
        let mut out = format!("overall overlap {:.4}\n", self.overall);
        for (class, score) in &self.per_class {
            let _ = writeln!(out, "  class {class:<6} {score:.4}");
        }
        out
    }
}

fn check_comparable(a: &GlobalDescription, b: &GlobalDescription) -> Result<()> {
    if a.num_features != b.num_features {
        return Err(Error::Comparison(format!("feature widths differ: {} vs {}", a.num_features, b.num_features)));
    }
    if a.classes != b.classes {
        return Err(Error::Comparison(format!("class sets differ: {:?} vs {:?}", a.classes, b.classes)));
    }
    Ok(())
}

fn class_records(g: &GlobalDescription, class: u32) -> Vec<&ClauseRecord> {
    g.records.iter().filter(|r| r.class == class).collect()
}

fn non_empty(g: &GlobalDescription, class: u32) -> Vec<&ClauseRecord> {
    g.records.iter().filter(|r| r.class == class && !r.empty).collect()
}

fn best_match<'a>(r: &ClauseRecord, pool: &[&'a ClauseRecord]) -> Option<(&'a ClauseRecord, f64)> {
    let mut best: Option<(&ClauseRecord, f64)> = None;
    for &c in pool.iter().filter(|c| c.polarity == r.polarity) {
        let j = clause_jaccard(&r.literals, &c.literals);
        if best.is_none_or(|(_, bj)| j > bj) {
            best = Some((c, j));
        }
    }
    best
}

/// Weighted mean of best-match Jaccard scores of `from` against `to`.
fn directed(from: &[&ClauseRecord], to: &[&ClauseRecord], pairs: Option<&mut Vec<MatchedPair>>) -> f64 {
    let total: u64 = from.iter().map(|r| u64::from(r.weight)).sum();
    let mut score = 0.0;
    let mut out = pairs;
    for r in from {
        let factor = f64::from(r.weight) / total as f64;
        let (m, j) = match best_match(r, to) {
            Some((m, j)) => (Some(m), j),
            None => (None, 0.0),
        };
        score += factor * j;
        if let (Some(list), Some(m)) = (out.as_deref_mut(), m) {
            list.push(MatchedPair { a: (*r).clone(), b: m.clone(), jaccard: j, weight_factor: factor });
        }
    }
    score
}

/// Symmetric, weight-normalized best-match overlap of two descriptions.
///
/// Empty clauses take part and match each other with Jaccard 1, so two
/// models that both left a clause empty agree on it. A class with no records
/// on either side scores 1; on one side only, 0. The overall score weights
/// each class by its share of the clause weight on both sides.
pub fn description_overlap(g1: &GlobalDescription, g2: &GlobalDescription) -> Result<SimilarityReport> {
    check_comparable(g1, g2)?;
    let mut per_class = BTreeMap::new();
    let mut matched_pairs = Vec::new();
    let mut weighted = 0.0;
    let mut total = 0u64;
    for &class in &g1.classes {
        let a = class_records(g1, class);
        let b = class_records(g2, class);
        let score = match (a.is_empty(), b.is_empty()) {
            (true, true) => 1.0,
            (true, false) | (false, true) => 0.0,
            _ => (directed(&a, &b, Some(&mut matched_pairs)) + directed(&b, &a, None)) / 2.0,
        };
        let w: u64 = a.iter().chain(&b).map(|r| u64::from(r.weight)).sum();
        weighted += score * w as f64;
        total += w;
        per_class.insert(class, score);
    }
    let overall = if total == 0 { 1.0 } else { weighted / total as f64 };
    Ok(SimilarityReport { overall, per_class, matched_pairs })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightShift {
    pub baseline: ClauseRecord,
    pub new: ClauseRecord,
    pub jaccard: f64,
    /// `max(w_a, w_b) / min(w_a, w_b)`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChangeReport {
    pub changed: bool,
    pub overlap: f64,
    pub theta: f64,
    pub match_threshold: f64,
    /// Clauses of the new description with no baseline match at the threshold.
    pub new_literal_patterns: Vec<ClauseRecord>,
    /// Baseline clauses with no match in the new description.
    pub vanished_patterns: Vec<ClauseRecord>,
    pub weight_shifts: Vec<WeightShift>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChangeConfig {
    pub theta: f64,
    pub match_threshold: f64,
    pub weight_ratio: f64,
}

impl ChangeConfig {
    pub fn new(theta: f64) -> Self {
        ChangeConfig { theta, match_threshold: DEFAULT_MATCH_THRESHOLD, weight_ratio: DEFAULT_WEIGHT_RATIO }
    }
}

fn unmatched(from: &GlobalDescription, to: &GlobalDescription, threshold: f64) -> Vec<ClauseRecord> {
    let mut out = Vec::new();
    for &class in &from.classes {
        let pool = non_empty(to, class);
        for r in non_empty(from, class) {
            if best_match(r, &pool).is_none_or(|(_, j)| j < threshold) {
                out.push(r.clone());
            }
        }
    }
    out
}

pub fn detect_change(baseline: &GlobalDescription, new: &GlobalDescription, cfg: ChangeConfig) -> Result<ChangeReport> {
    if !(cfg.theta > 0.0 && cfg.theta < 1.0) {
        return Err(Error::Parameter(format!("theta must be in (0, 1), got {}", cfg.theta)));
    }
    if !(0.0..=1.0).contains(&cfg.match_threshold) || cfg.weight_ratio < 1.0 {
        return Err(Error::Parameter("match threshold must be in [0, 1] and weight ratio at least 1".into()));
    }
    let sim = description_overlap(baseline, new)?;
    let new_literal_patterns = unmatched(new, baseline, cfg.match_threshold);
    let vanished_patterns = unmatched(baseline, new, cfg.match_threshold);
    let weight_shifts = sim
        .matched_pairs
        .iter()
        .filter(|p| p.jaccard >= cfg.match_threshold)
        .filter_map(|p| {
            let (x, y) = (f64::from(p.a.weight), f64::from(p.b.weight));
            let ratio = x.max(y) / x.min(y);
            (ratio > cfg.weight_ratio).then(|| WeightShift {
                baseline: p.a.clone(),
                new: p.b.clone(),
                jaccard: p.jaccard,
                ratio,
            })
        })
        .collect();
    Ok(ChangeReport {
        changed: sim.overall < cfg.theta || !new_literal_patterns.is_empty(),
        overlap: sim.overall,
        theta: cfg.theta,
        match_threshold: cfg.match_threshold,
        new_literal_patterns,
        vanished_patterns,
        weight_shifts,
    })
}

impl ChangeReport {
    pub fn render(&self, names: &GlobalDescription) -> String {
        let mut out = format!(
            "changed {}  overlap {:.4} (theta {})\n",
            self.changed, self.overlap, self.theta
        );
        let mut list = |title: &str, recs: &[ClauseRecord]| {
            let _ = writeln!(out, "{title}: {}", recs.len());
            for r in recs {
                let _ = writeln!(out, "  class {} {} w={} {}", r.class, r.polarity.symbol(), r.weight, names.clause_text(r));
            }
        };
        list("new patterns", &self.new_literal_patterns);
        list("vanished patterns", &self.vanished_patterns);
        let _ = writeln!(out, "weight shifts: {}", self.weight_shifts.len());
        for s in &self.weight_shifts {
            let _ = writeln!(
                out,
                "  class {} {} {} -> {} {}",
                s.baseline.class,
                s.baseline.polarity.symbol(),
                s.baseline.weight,
                s.new.weight,
                names.clause_text(&s.new)
            );
        }
        out
    }
}

/// Best-match weight of a literal pattern among one class/polarity group, if any
/// clause reaches `threshold` Jaccard. Ties go to the heavier clause.
pub fn matched_weight(g: &GlobalDescription, class: u32, polarity: Polarity, pattern: &[usize], threshold: f64) -> Option<u32> {
    let mut sorted = pattern.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    g.group(class, polarity)
        .filter(|r| !r.empty)
        .map(|r| (clause_jaccard(&sorted, &r.literals), r.weight))
        .filter(|&(j, _)| j >= threshold)
        .max_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .map(|(_, w)| w)
}

/// Total weight of the clauses in one class/polarity group that contain every
/// literal of `all` and, when `any` is non-empty, at least one literal of `any`.
///
/// A rule "a or b, and q" is supported by clauses holding `q` plus `a` or `b`.
pub fn rule_support(g: &GlobalDescription, class: u32, polarity: Polarity, all: &[usize], any: &[usize]) -> u32 {
    g.group(class, polarity)
        .filter(|r| all.iter().all(|k| r.literals.contains(k)))
        .filter(|r| any.is_empty() || any.iter().any(|k| r.literals.contains(k)))
        .map(|r| r.weight)
        .sum()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Cut {
    pub id: usize,
    /// Positions into the dataset the cut was drawn from, ascending.
    pub positions: Vec<usize>,
}

/// `n` independent uniform samples of `floor(fraction * len)` rows each.
pub fn make_cuts(len: usize, n: usize, fraction: f64, stream: &mut Stream) -> Result<Vec<Cut>> {
    if n < 2 {
        return Err(Error::Parameter(format!("need at least 2 cuts, got {n}")));
    }
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Parameter(format!("cut fraction must be in (0, 1), got {fraction}")));
    }
    let size = (fraction * len as f64).floor() as usize;
    if size == 0 || size > len {
        return Err(Error::Parameter(format!("cut size {size} invalid for {len} rows")));
    }
    Ok((0..n)
        .map(|id| {
            let mut positions = stream.sample_indices(len, size);
            positions.sort_unstable();
            Cut { id, positions }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutScore {
    pub id: usize,
    /// Row ids of the cut.
    pub rows: Vec<u64>,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RemovalCandidate {
    pub id: usize,
    pub score: f64,
    pub delta: f64,
    /// `delta > 0`: removing the cut moves the data closer to the baseline.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutReport {
    pub baseline_score: f64,
    pub cuts: Vec<CutScore>,
    /// Sorted by descending delta, ties by cut id.
    pub removal_candidates: Vec<RemovalCandidate>,
}

impl CutReport {
    pub fn flagged(&self) -> impl Iterator<Item = &RemovalCandidate> {
        self.removal_candidates.iter().filter(|r| r.flagged)
    }

    pub fn render(&self) -> String {
        let mut out = format!("baseline overlap {:.4}\n cut   score\n", self.baseline_score);
        for c in &self.cuts {
            let _ = writeln!(out, " {:<5} {:.4}", c.id, c.score);
        }
        out.push_str(" removed  score   delta\n");
        for r in &self.removal_candidates {
            let _ = writeln!(out, " {:<8} {:.4}  {:+.4}{}", r.id, r.score, r.delta, if r.flagged { "  *" } else { "" });
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalizeConfig {
    pub cuts: usize,
    pub remove: usize,
    pub fraction: f64,
}

impl Default for LocalizeConfig {
    fn default() -> Self {
        LocalizeConfig { cuts: 10, remove: 5, fraction: 0.5 }
    }
}

/// Substream tags inside one localization run.
pub mod localize_stage {
    pub const BASELINE: u64 = 0;
    pub const CUTS: u64 = 1;
    pub const CUT_MODEL: u64 = 100;
    pub const REMOVAL_MODEL: u64 = 1000;
}

/// Scores overlapping cuts of `d_m` against a baseline description and tries
/// removing the least similar ones.
///
/// A model trained on all of `d_m` gives the reference score. Each cut gets its
/// own model and score; the `remove` lowest-scoring cuts are then each removed
/// from `d_m` in turn, and the retrained model's score is compared to the
/// reference. Cut and removal models train in parallel on their own substreams.
pub fn localize_inconsistencies(
    baseline: &GlobalDescription,
    d_m: &BinaryDataset,
    cfg: LocalizeConfig,
    params: &HyperParams,
    stream: &Stream,
    exec: Execution,
) -> Result<CutReport> {
    if cfg.remove > cfg.cuts {
        return Err(Error::Parameter(format!("cannot remove {} of {} cuts", cfg.remove, cfg.cuts)));
    }
    let classes = baseline.classes.clone();
    let score = |data: &BinaryDataset, tag: u64| -> Result<f64> {
        let tm = train_model(params, data, Some(&classes), &stream.substream(tag))?;
        Ok(description_overlap(baseline, &tm.global_description())?.overall)
    };
    let cuts = make_cuts(d_m.len(), cfg.cuts, cfg.fraction, &mut stream.substream(localize_stage::CUTS))?;
    let baseline_score = score(d_m, localize_stage::BASELINE)?;
    let cut_scores = par::try_map_range(exec, cuts.len(), |i| {
        score(&d_m.subset(&cuts[i].positions), localize_stage::CUT_MODEL + i as u64)
    })?;

    let mut order: Vec<usize> = (0..cuts.len()).collect();
    order.sort_by(|&a, &b| cut_scores[a].total_cmp(&cut_scores[b]).then(a.cmp(&b)));
    let removal: Vec<usize> = order[..cfg.remove].to_vec();
    let removal_scores = par::try_map_range(exec, removal.len(), |j| {
        score(&d_m.without(&cuts[removal[j]].positions), localize_stage::REMOVAL_MODEL + removal[j] as u64)
    })?;

    let mut removal_candidates: Vec<RemovalCandidate> = removal
        .iter()
        .zip(removal_scores)
        .map(|(&id, s)| RemovalCandidate { id, score: s, delta: s - baseline_score, flagged: s > baseline_score })
        .collect();
    removal_candidates.sort_by(|a, b| b.delta.total_cmp(&a.delta).then(a.id.cmp(&b.id)));
    let cuts = cuts
        .iter()
        .zip(cut_scores)
        .map(|(c, score)| CutScore { id: c.id, rows: c.positions.iter().map(|&p| d_m.id(p)).collect(), score })
        .collect();
    Ok(CutReport { baseline_score, cuts, removal_candidates })
}

fn require_two_class(model: &TsetlinMachine) -> Result<()> {
    if model.classes().len() != 2 {
        return Err(Error::Unsupported(format!(
            "ASD needs a two-class model, this one has {} classes",
            model.classes().len()
        )));
    }
    Ok(())
}

/// Mean absolute difference between the two class sums, over all rows.
pub fn mean_asd(model: &TsetlinMachine, data: &BinaryDataset, exec: Execution) -> Result<f64> {
    require_two_class(model)?;
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let traces = model.trace_batch(data, exec)?;
    Ok(traces.iter().map(|t| t.asd.unwrap_or(0) as f64).sum::<f64>() / traces.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompatibilityGroup {
    pub truth: u32,
    pub predicted: u32,
    pub count: usize,
    pub clause_cnt: [f64; 2],
    pub positive_cnt: [f64; 2],
    pub asd: f64,
}

/// Decision statistics grouped by (true label, prediction). Labels the model
/// never saw form their own groups.
pub fn compatibility_report(model: &TsetlinMachine, data: &BinaryDataset, exec: Execution) -> Result<Vec<CompatibilityGroup>> {
    require_two_class(model)?;
    let traces = model.trace_batch(data, exec)?;
    let mut groups: BTreeMap<(u32, u32), CompatibilityGroup> = BTreeMap::new();
    for (t, &truth) in traces.iter().zip(data.labels()) {
        let g = groups.entry((truth, t.predicted)).or_insert(CompatibilityGroup {
            truth,
            predicted: t.predicted,
            count: 0,
            clause_cnt: [0.0; 2],
            positive_cnt: [0.0; 2],
            asd: 0.0,
        });
        g.count += 1;
        for c in 0..2 {
            g.clause_cnt[c] += t.classes[c].clause_cnt as f64;
            g.positive_cnt[c] += t.classes[c].positive_cnt as f64;
        }
        g.asd += t.asd.unwrap_or(0) as f64;
    }
    Ok(groups
        .into_values()
        .map(|mut g| {
            let n = g.count as f64;
            g.clause_cnt.iter_mut().chain(g.positive_cnt.iter_mut()).for_each(|v| *v /= n);
            g.asd /= n;
            g
        })
        .collect())
}

pub fn render_compatibility(groups: &[CompatibilityGroup]) -> String {
    let mut out = String::from("truth pred  count  clause_cnt_0 positive_cnt_0 clause_cnt_1 positive_cnt_1 asd\n");
    for g in groups {
        let _ = writeln!(
            out,
            "{:<5} {:<5} {:<6} {:<12.3} {:<14.3} {:<12.3} {:<14.3} {:.3}",
            g.truth, g.predicted, g.count, g.clause_cnt[0], g.positive_cnt[0], g.clause_cnt[1], g.positive_cnt[1], g.asd
        );
    }
    out
}

/// Distinct literal indices mentioned anywhere in `records`.
pub fn mentioned_literals(records: &[ClauseRecord]) -> BTreeSet<usize> {
    records.iter().flat_map(|r| r.literals.iter().copied()).collect()
}
