//! Stratified splits, SMOTE on binary features, and ASD-informed oversampling.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::BinaryDataset;
use crate::error::{Error, Result};
use crate::fusion::mean_asd;
use crate::par::{self, Execution};
use crate::rng::Stream;
use crate::tm::{train_model, HyperParams};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub k: usize,
    pub repeats: usize,
    /// `k * repeats` position lists; subset `r * k + i` is fold `i` of repeat `r`.
    pub subsets: Vec<Vec<usize>>,
}

impl SplitPlan {
    pub fn repeat_of(&self, id: usize) -> usize {
        id / self.k
    }
}

/// Per repeat, a fresh stratified partition into `k` folds.
///
/// Each class is shuffled and dealt round-robin; the dealing position carries
/// over from one class to the next so fold sizes differ by at most one.
pub fn stratified_kfold(d: &BinaryDataset, k: usize, repeats: usize, stream: &mut Stream) -> Result<SplitPlan> {
    if k < 2 || repeats == 0 {
        return Err(Error::Parameter(format!("need k >= 2 and at least one repeat, got k={k} repeats={repeats}")));
    }
    let mut by_class: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, &y) in d.labels().iter().enumerate() {
        by_class.entry(y).or_default().push(i);
    }
    if let Some((c, rows)) = by_class.iter().find(|(_, rows)| rows.len() < k) {
        return Err(Error::Parameter(format!("class {c} has {} rows, fewer than k={k}", rows.len())));
    }
    let mut subsets = Vec::with_capacity(k * repeats);
    for _ in 0..repeats {
        let mut folds = vec![Vec::new(); k];
        let mut next = 0;
        for rows in by_class.values() {
            let mut rows = rows.clone();
            stream.shuffle(&mut rows);
            for p in rows {
                folds[next].push(p);
                next = (next + 1) % k;
            }
        }
        for f in &mut folds {
            f.sort_unstable();
        }
        subsets.extend(folds);
    }
    Ok(SplitPlan { k, repeats, subsets })
}

fn minority_majority(d: &BinaryDataset) -> Result<(u32, usize, u32, usize)> {
    let counts = d.class_counts();
    if counts.len() != 2 {
        return Err(Error::Unsupported(format!("SMOTE needs exactly two classes, found {}", counts.len())));
    }
    let mut it = counts.into_iter();
    let (a, b) = (it.next().unwrap(), it.next().unwrap());
    // equal counts: the higher label is treated as the minority
    Ok(if a.1 < b.1 { (a.0, a.1, b.0, b.1) } else { (b.0, b.1, a.0, a.1) })
}

fn hamming(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoteOutcome {
    pub data: BinaryDataset,
    /// Positions of the appended synthetic rows.
    pub synthetic: Vec<usize>,
    /// Per synthetic row, the positions of its seed and neighbour.
    pub parents: Vec<(usize, usize)>,
}

/// Appends minority rows until the minority count reaches `ceil(ratio * majority)`.
///
/// Seeds and neighbours come from the minority rows among `donors`. Each new
/// row picks a seed uniformly, one of the seed's `k_neighbors` nearest donors
/// by Hamming distance (ties by position), and takes every bit from seed or
/// neighbour by a fair coin.
pub fn smote_from_donors(
    d: &BinaryDataset,
    donors: &[usize],
    ratio: f64,
    k_neighbors: usize,
    stream: &mut Stream,
) -> Result<SmoteOutcome> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(Error::Parameter(format!("ratio must be in (0, 1], got {ratio}")));
    }
    if k_neighbors == 0 {
        return Err(Error::Parameter("k_neighbors must be at least 1".into()));
    }
    let (minority, min_count, _, maj_count) = minority_majority(d)?;
    let target = (ratio * maj_count as f64).ceil() as usize;
    let mut out = SmoteOutcome { data: d.clone(), synthetic: Vec::new(), parents: Vec::new() };
    if min_count >= target {
        return Ok(out);
    }
    let mut pool: Vec<usize> = donors.iter().copied().filter(|&p| d.label(p) == minority).collect();
    pool.sort_unstable();
    pool.dedup();
    if pool.len() < k_neighbors + 1 {
        return Err(Error::Parameter(format!(
            "{} minority donor rows, need at least k_neighbors + 1 = {}",
            pool.len(),
            k_neighbors + 1
        )));
    }
    let neighbours: Vec<Vec<usize>> = pool
        .iter()
        .map(|&s| {
            let mut cand: Vec<(usize, usize)> =
                pool.iter().filter(|&&q| q != s).map(|&q| (hamming(d.row(s), d.row(q)), q)).collect();
            cand.sort_unstable();
            cand.into_iter().take(k_neighbors).map(|(_, q)| q).collect()
        })
        .collect();
    for _ in min_count..target {
        let si = stream.below(pool.len());
        let seed = pool[si];
        let nb = neighbours[si][stream.below(k_neighbors)];
        let row = d.row(seed).iter().zip(d.row(nb)).map(|(&a, &b)| if stream.coin() { a } else { b }).collect();
        let id = out.data.next_id();
        out.data.push(row, minority, id)?;
        out.synthetic.push(out.data.len() - 1);
        out.parents.push((seed, nb));
    }
    Ok(out)
}

pub fn smote_binary(d: &BinaryDataset, ratio: f64, k_neighbors: usize, stream: &mut Stream) -> Result<SmoteOutcome> {
    let all: Vec<usize> = (0..d.len()).collect();
    smote_from_donors(d, &all, ratio, k_neighbors, stream)
}

/// What each split-trained model is scored on.
#[derive(Debug, Clone, Copy)]
pub enum GradeProtocol<'a> {
    /// The other folds of the same repeat.
    Complement,
    /// A fixed evaluation set.
    Holdout(&'a BinaryDataset),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitGrade {
    pub id: usize,
    pub asd: f64,
}

/// Trains one model per subset and scores its mean ASD. Sorted by descending
/// ASD, ties by subset id. Subset `i` trains on substream `i`.
pub fn grade_splits(
    plan: &SplitPlan,
    d: &BinaryDataset,
    params: &HyperParams,
    protocol: GradeProtocol<'_>,
    stream: &Stream,
    exec: Execution,
) -> Result<Vec<SplitGrade>> {
    let classes = d.classes();
    if classes.len() != 2 {
        return Err(Error::Unsupported(format!("grading needs two classes, found {}", classes.len())));
    }
    let mut grades = par::try_map_range(exec, plan.subsets.len(), |id| {
        let train = d.subset(&plan.subsets[id]);
        let tm = train_model(params, &train, Some(&classes), &stream.substream(id as u64))?;
        let asd = match protocol {
            GradeProtocol::Holdout(test) => mean_asd(&tm, test, Execution::Sequential)?,
            GradeProtocol::Complement => {
                let r = plan.repeat_of(id);
                let rest: Vec<usize> = (r * plan.k..(r + 1) * plan.k)
                    .filter(|&j| j != id)
                    .flat_map(|j| plan.subsets[j].iter().copied())
                    .collect();
                mean_asd(&tm, &d.subset(&rest), Execution::Sequential)?
            }
        };
        Ok::<_, Error>(SplitGrade { id, asd })
    })?;
    grades.sort_by(|a, b| b.asd.total_cmp(&a.asd).then(a.id.cmp(&b.id)));
    Ok(grades)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyKind {
    None,
    RandomSmote,
    MaxAsd,
    Top25Asd,
    DropMinAsd,
    DropBottom25Asd,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 6] = [
        StrategyKind::None,
        StrategyKind::RandomSmote,
        StrategyKind::MaxAsd,
        StrategyKind::Top25Asd,
        StrategyKind::DropMinAsd,
        StrategyKind::DropBottom25Asd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::None => "none",
            StrategyKind::RandomSmote => "random-smote",
            StrategyKind::MaxAsd => "max-asd",
            StrategyKind::Top25Asd => "top25-asd",
            StrategyKind::DropMinAsd => "drop-min-asd",
            StrategyKind::DropBottom25Asd => "drop-bottom25-asd",
        }
    }

    pub fn needs_grading(self) -> bool {
        !matches!(self, StrategyKind::None | StrategyKind::RandomSmote)
    }

    /// Subset ids selected as donors from grades sorted best first.
    pub fn select(self, grades: &[SplitGrade]) -> Vec<usize> {
        let n = grades.len();
        let quarter = n.div_ceil(4);
        let ids = grades.iter().map(|g| g.id);
        match self {
            StrategyKind::None | StrategyKind::RandomSmote => Vec::new(),
            StrategyKind::MaxAsd => ids.take(1).collect(),
            StrategyKind::Top25Asd => ids.take(quarter).collect(),
            StrategyKind::DropMinAsd => ids.take(n.saturating_sub(1)).collect(),
            StrategyKind::DropBottom25Asd => ids.take(n - quarter).collect(),
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown strategy {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OversampleStrategy {
    pub kind: StrategyKind,
    /// Target minority/majority ratio.
    pub ratio: f64,
    pub k_neighbors: usize,
}

#[derive(Debug, Clone)]
pub struct OversampleOutcome {
    pub data: BinaryDataset,
    /// Grades of every subset, when the strategy grades.
    pub grades: Option<Vec<SplitGrade>>,
    pub donor_subsets: Vec<usize>,
    pub synthetic: Vec<usize>,
}

/// Substream tags inside one oversampling run.
pub mod oversample_stage {
    pub const SPLITS: u64 = 1;
    pub const GRADE: u64 = 2;
    pub const SMOTE: u64 = 3;
}

/// Oversamples the minority class of `d` to the strategy's ratio.
///
/// Grading strategies draw SMOTE seeds and neighbours only from the subsets
/// they select; random SMOTE draws from every row. Original rows are kept
/// either way.
#[allow(clippy::too_many_arguments)]
pub fn informed_oversample(
    d: &BinaryDataset,
    params: &HyperParams,
    strategy: OversampleStrategy,
    k: usize,
    repeats: usize,
    protocol: GradeProtocol<'_>,
    stream: &Stream,
    exec: Execution,
) -> Result<OversampleOutcome> {
    let mut smote_stream = stream.substream(oversample_stage::SMOTE);
    match strategy.kind {
        StrategyKind::None => {
            Ok(OversampleOutcome { data: d.clone(), grades: None, donor_subsets: Vec::new(), synthetic: Vec::new() })
        }
        StrategyKind::RandomSmote => {
            let out = smote_binary(d, strategy.ratio, strategy.k_neighbors, &mut smote_stream)?;
            Ok(OversampleOutcome { data: out.data, grades: None, donor_subsets: Vec::new(), synthetic: out.synthetic })
        }
        kind => {
            let plan = stratified_kfold(d, k, repeats, &mut stream.substream(oversample_stage::SPLITS))?;
            let grades = grade_splits(&plan, d, params, protocol, &stream.substream(oversample_stage::GRADE), exec)?;
            let donor_subsets = kind.select(&grades);
            let donors: Vec<usize> = donor_subsets.iter().flat_map(|&id| plan.subsets[id].iter().copied()).collect();
            let out = smote_from_donors(d, &donors, strategy.ratio, strategy.k_neighbors, &mut smote_stream)?;
            Ok(OversampleOutcome { data: out.data, grades: Some(grades), donor_subsets, synthetic: out.synthetic })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dataset(counts: &[(u32, usize)], f: usize, stream: &mut Stream) -> BinaryDataset {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for &(c, n) in counts {
            for _ in 0..n {
                rows.push((0..f).map(|_| u8::from(stream.coin())).collect());
                labels.push(c);
            }
        }
        BinaryDataset::new(crate::data::default_feature_names(f), rows, labels).unwrap()
    }

    #[test]
    fn folds_preserve_proportions() {
        let d = dataset(&[(0, 60), (1, 40)], 4, &mut Stream::new(1));
        let plan = stratified_kfold(&d, 10, 1, &mut Stream::new(2)).unwrap();
        for s in &plan.subsets {
            let ones = s.iter().filter(|&&p| d.label(p) == 1).count();
            assert_eq!((s.len() - ones, ones), (6, 4));
        }
        let two = stratified_kfold(&d, 10, 2, &mut Stream::new(2)).unwrap();
        assert_eq!(two.subsets.len(), 20);
        let small = dataset(&[(0, 20), (1, 3)], 4, &mut Stream::new(1));
        assert!(stratified_kfold(&small, 10, 1, &mut Stream::new(2)).is_err());
    }

    #[test]
    fn balanced_data_is_unchanged() {
        let d = dataset(&[(0, 30), (1, 30)], 8, &mut Stream::new(3));
        let out = smote_binary(&d, 1.0, 5, &mut Stream::new(4)).unwrap();
        assert_eq!(out.data, d);
        assert!(out.synthetic.is_empty());
    }

    #[test]
    fn smote_reaches_target_and_copies_parent_bits() {
        let d = dataset(&[(0, 100), (1, 30)], 12, &mut Stream::new(5));
        let out = smote_binary(&d, 0.8, 5, &mut Stream::new(6)).unwrap();
        assert_eq!(out.data.class_counts()[&1], 80);
        assert_eq!(out.data.class_counts()[&0], 100);
        for (&p, &(s, n)) in out.synthetic.iter().zip(&out.parents) {
            assert_eq!(out.data.label(p), 1);
            for k in 0..12 {
                let b = out.data.row(p)[k];
                assert!(b == d.row(s)[k] || b == d.row(n)[k]);
            }
        }
        assert_eq!(&out.data.rows()[..130], d.rows());
    }

    #[test]
    fn smote_needs_enough_minority_rows() {
        let d = dataset(&[(0, 50), (1, 5)], 4, &mut Stream::new(7));
        assert!(smote_binary(&d, 1.0, 5, &mut Stream::new(8)).is_err());
        assert!(smote_binary(&d, 1.0, 4, &mut Stream::new(8)).is_ok());
        assert!(smote_binary(&d, 1.5, 4, &mut Stream::new(8)).is_err());
    }

    #[test]
    fn strategy_selection() {
        let grades: Vec<SplitGrade> = (0..8).map(|id| SplitGrade { id, asd: 10.0 - id as f64 }).collect();
        assert_eq!(StrategyKind::MaxAsd.select(&grades), vec![0]);
        assert_eq!(StrategyKind::Top25Asd.select(&grades), vec![0, 1]);
        assert_eq!(StrategyKind::DropMinAsd.select(&grades), (0..7).collect::<Vec<_>>());
        assert_eq!(StrategyKind::DropBottom25Asd.select(&grades), (0..6).collect::<Vec<_>>());
        for k in StrategyKind::ALL {
            assert_eq!(k.name().parse::<StrategyKind>().unwrap(), k);
        }
        assert!("bogus".parse::<StrategyKind>().is_err());
    }
}
