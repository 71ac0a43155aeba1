//! Turning raw numeric tables and text into binary features.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{BinaryDataset, LABEL_COLUMN};
use crate::error::{Error, Result};

/// Numeric rows with optional integer labels.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericTable {
    pub names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Option<Vec<u32>>,
}

impl NumericTable {
    pub fn new(names: Vec<String>, rows: Vec<Vec<f64>>, labels: Option<Vec<u32>>) -> Result<Self> {
        if let Some(bad) = rows.iter().find(|r| r.len() != names.len()) {
            return Err(Error::Dimension { expected: names.len(), got: bad.len() });
        }
        if let Some(l) = &labels {
            if l.len() != rows.len() {
                return Err(Error::Dimension { expected: rows.len(), got: l.len() });
            }
        }
        Ok(NumericTable { names, rows, labels })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(move |r| r[j])
    }

    fn position(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Header row of feature names; a `label` column, if present, becomes the labels.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
        let label_col = header.iter().position(|h| h == LABEL_COLUMN);
        let names = header.iter().enumerate().filter(|&(i, _)| Some(i) != label_col).map(|(_, h)| h.clone()).collect();
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let mut row = Vec::with_capacity(header.len());
            for (i, field) in rec.iter().enumerate() {
                let field = field.trim();
                if Some(i) == label_col {
                    labels.push(field.parse().map_err(|_| {
                        Error::Format(format!("row {}: label {field:?} is not a non-negative integer", line + 1))
                    })?);
                } else {
                    row.push(field.parse().map_err(|_| {
                        Error::Format(format!("row {}: {:?} in column {} is not a number", line + 1, field, header[i]))
                    })?);
                }
            }
            rows.push(row);
        }
        NumericTable::new(names, rows, label_col.map(|_| labels))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(std::io::BufReader::new(file))
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = self.names.clone();
        if self.labels.is_some() {
            header.push(LABEL_COLUMN.to_owned());
        }
        w.write_record(&header)?;
        for (i, row) in self.rows.iter().enumerate() {
            let mut rec: Vec<String> = row.iter().map(f64::to_string).collect();
            if let Some(l) = &self.labels {
                rec.push(l[i].to_string());
            }
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::Format(e.to_string()))?;
        Ok(())
    }

    fn labels_or_zero(&self) -> Vec<u32> {
        self.labels.clone().unwrap_or_else(|| vec![0; self.rows.len()])
    }
}

/// Nearest-rank percentile of sorted values: the value at rank `ceil(q * n)`.
pub fn nearest_rank(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let rank = ((q * n as f64).ceil() as usize).clamp(1, n);
    sorted[rank - 1]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureBins {
    pub name: String,
    /// Interior cut points; bin `i` covers `(edges[i-1], edges[i]]`.
    pub edges: Vec<f64>,
    /// Constant in training: encoded as one always-on bit.
    pub degenerate: bool,
}

impl FeatureBins {
    pub fn width(&self) -> usize {
        if self.degenerate {
            1
        } else {
            self.edges.len() + 1
        }
    }

    /// Number of edges strictly below `v`; values outside the training range clamp to the end bins.
    pub fn bin(&self, v: f64) -> usize {
        if self.degenerate {
            0
        } else {
            self.edges.partition_point(|&e| e < v)
        }
    }

    pub fn labels(&self) -> Vec<String> {
        if self.degenerate {
            return vec![format!("{}_(-inf::inf)", self.name)];
        }
        (0..self.width())
            .map(|i| {
                let lo = if i == 0 { "-inf".to_owned() } else { fmt_edge(self.edges[i - 1]) };
                let hi = if i == self.edges.len() { "inf".to_owned() } else { fmt_edge(self.edges[i]) };
                format!("{}_({lo}::{hi}]", self.name)
            })
            .collect()
    }
}

fn fmt_edge(v: f64) -> String {
    let s = format!("{v:.2}");
    s.strip_suffix(".00").map(str::to_owned).unwrap_or(s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinningSpec {
    pub bins: usize,
    pub features: Vec<FeatureBins>,
}

/// Per feature, edges at the `i/b` nearest-rank percentiles for `i = 1..b`.
pub fn fit_percentile_bins(raw: &NumericTable, bins: usize) -> Result<BinningSpec> {
    if bins < 2 {
        return Err(Error::Parameter(format!("need at least 2 bins, got {bins}")));
    }
    if raw.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let features = raw
        .names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let mut col: Vec<f64> = raw.column(j).collect();
            if col.iter().any(|v| v.is_nan()) {
                return Err(Error::Format(format!("column {name} contains NaN")));
            }
            col.sort_by(f64::total_cmp);
            let degenerate = col[0] == col[col.len() - 1];
            let edges = if degenerate {
                Vec::new()
            } else {
                (1..bins).map(|i| nearest_rank(&col, i as f64 / bins as f64)).collect()
            };
            Ok(FeatureBins { name: name.clone(), edges, degenerate })
        })
        .collect::<Result<_>>()?;
    Ok(BinningSpec { bins, features })
}

impl BinningSpec {
    pub fn feature_names(&self) -> Vec<String> {
        self.features.iter().flat_map(FeatureBins::labels).collect()
    }

    /// One-hot bin encoding; the table's columns are matched to the spec by name.
    pub fn apply(&self, raw: &NumericTable) -> Result<BinaryDataset> {
        let cols: Vec<usize> = self
            .features
            .iter()
            .map(|f| raw.position(&f.name).ok_or_else(|| Error::UnknownFeature(f.name.clone())))
            .collect::<Result<_>>()?;
        let rows = raw
            .rows
            .iter()
            .map(|r| {
                let mut bits = Vec::new();
                for (f, &c) in self.features.iter().zip(&cols) {
                    let start = bits.len();
                    bits.resize(start + f.width(), 0u8);
                    bits[start + f.bin(r[c])] = 1;
                }
                bits
            })
            .collect();
        BinaryDataset::new(self.feature_names(), rows, raw.labels_or_zero())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationStats {
    pub means: BTreeMap<String, f64>,
}

impl PopulationStats {
    pub fn fit(train: &NumericTable) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let n = train.len() as f64;
        let means = train.names.iter().enumerate().map(|(j, name)| (name.clone(), train.column(j).sum::<f64>() / n)).collect();
        Ok(PopulationStats { means })
    }
}

/// Bit is 1 iff the value is strictly above the feature's training mean.
pub fn mean_threshold_binarize(raw: &NumericTable, stats: &PopulationStats) -> Result<BinaryDataset> {
    let means: Vec<f64> = raw
        .names
        .iter()
        .map(|n| stats.means.get(n).copied().ok_or_else(|| Error::MissingStat(n.clone())))
        .collect::<Result<_>>()?;
    let rows = raw.rows.iter().map(|r| r.iter().zip(&means).map(|(v, m)| u8::from(v > m)).collect()).collect();
    BinaryDataset::new(raw.names.clone(), rows, raw.labels_or_zero())
}

pub const HALF_SUMMARY_NAMES: [&str; 10] = [
    "mean_first_half",
    "mean_second_half",
    "median_first_half",
    "median_second_half",
    "min_first_half",
    "min_second_half",
    "max_first_half",
    "max_second_half",
    "variance_first_half",
    "variance_second_half",
];

fn summary(xs: &[f64]) -> [f64; 5] {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    let mid = s.len() / 2;
    let median = if s.len().is_multiple_of(2) { (s[mid - 1] + s[mid]) / 2.0 } else { s[mid] };
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    [mean, median, s[0], s[s.len() - 1], var]
}

/// Mean, median, minimum, maximum and population variance of each half of a
/// series, interleaved by half in the order of [`HALF_SUMMARY_NAMES`]. The
/// first half takes the shorter side of an odd-length series.
pub fn half_summary(series: &[f64]) -> Result<[f64; 10]> {
    if series.len() < 2 {
        return Err(Error::Parameter("a series needs at least two values to split".into()));
    }
    let (a, b) = series.split_at(series.len() / 2);
    let (sa, sb) = (summary(a), summary(b));
    let mut out = [0.0; 10];
    for i in 0..5 {
        out[2 * i] = sa[i];
        out[2 * i + 1] = sb[i];
    }
    Ok(out)
}

/// Lowercased alphanumeric runs.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()).map(str::to_lowercase).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vocabulary {
    pub tokens: Vec<String>,
}

impl Vocabulary {
    /// The `size` tokens with the highest document frequency, ties broken lexicographically.
    pub fn fit(documents: &[Vec<String>], size: usize) -> Result<Self> {
        if documents.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if size == 0 {
            return Err(Error::Parameter("vocabulary size must be at least 1".into()));
        }
        let mut df: HashMap<&str, usize> = HashMap::new();
        for doc in documents {
            let mut seen: Vec<&str> = doc.iter().map(String::as_str).collect();
            seen.sort_unstable();
            seen.dedup();
            for t in seen {
                *df.entry(t).or_default() += 1;
            }
        }
        let mut ranked: Vec<(&str, usize)> = df.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        Ok(Vocabulary { tokens: ranked.into_iter().take(size).map(|(t, _)| t.to_owned()).collect() })
    }

    /// Presence bits; tokens outside the vocabulary are ignored.
    pub fn encode(&self, documents: &[Vec<String>], labels: Vec<u32>) -> Result<BinaryDataset> {
        let index: HashMap<&str, usize> = self.tokens.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();
        let rows = documents
            .iter()
            .map(|doc| {
                let mut bits = vec![0u8; self.tokens.len()];
                for t in doc {
                    if let Some(&i) = index.get(t.as_str()) {
                        bits[i] = 1;
                    }
                }
                bits
            })
            .collect();
        BinaryDataset::new(self.tokens.clone(), rows, labels)
    }
}

/// Fits a vocabulary on `documents` and encodes them.
pub fn bow_binarize(documents: &[Vec<String>], labels: Vec<u32>, vocab_size: usize) -> Result<(Vocabulary, BinaryDataset)> {
    let vocab = Vocabulary::fit(documents, vocab_size)?;
    let data = vocab.encode(documents, labels)?;
    Ok((vocab, data))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(cols: &[(&str, Vec<f64>)]) -> NumericTable {
        let n = cols[0].1.len();
        let rows = (0..n).map(|i| cols.iter().map(|c| c.1[i]).collect()).collect();
        NumericTable::new(cols.iter().map(|c| c.0.to_owned()).collect(), rows, None).unwrap()
    }

    #[test]
    fn uniform_ranks_give_decile_edges() {
        let t = table(&[("v", (1..=100).map(f64::from).collect())]);
        let spec = fit_percentile_bins(&t, 10).unwrap();
        assert_eq!(spec.features[0].edges, (1..10).map(|i| f64::from(i * 10)).collect::<Vec<_>>());
    }

    #[test]
    fn constant_feature_is_degenerate() {
        let t = table(&[("c", vec![3.0; 20]), ("v", (0..20).map(f64::from).collect())]);
        let spec = fit_percentile_bins(&t, 4).unwrap();
        assert!(spec.features[0].degenerate);
        assert_eq!(spec.features[0].width(), 1);
        let d = spec.apply(&t).unwrap();
        assert_eq!(d.num_features(), 1 + 4);
        assert!(d.rows().iter().all(|r| r[0] == 1));
    }

    #[test]
    fn bins_are_half_open_and_clamped() {
        let t = table(&[("v", (1..=100).map(f64::from).collect())]);
        let spec = fit_percentile_bins(&t, 10).unwrap();
        let f = &spec.features[0];
        assert_eq!(f.bin(15.0), 1);
        assert_eq!(f.labels()[1], "v_(10::20]");
        assert_eq!(f.bin(10.0), 0);
        assert_eq!(f.bin(1e9), 9);
        assert_eq!(f.bin(-1e9), 0);
        assert_eq!(f.labels()[0], "v_(-inf::10]");
    }

    #[test]
    fn apply_matches_columns_by_name() {
        let train = table(&[("a", vec![1.0, 2.0, 3.0, 4.0]), ("b", vec![4.0, 3.0, 2.0, 1.0])]);
        let spec = fit_percentile_bins(&train, 2).unwrap();
        let swapped = table(&[("b", vec![4.0]), ("a", vec![1.0])]);
        let d = spec.apply(&swapped).unwrap();
        assert_eq!(d.row(0), &[1, 0, 0, 1]);
        let missing = table(&[("a", vec![1.0])]);
        assert!(matches!(spec.apply(&missing), Err(Error::UnknownFeature(n)) if n == "b"));
        assert!(fit_percentile_bins(&table(&[("a", vec![])]), 2).is_err());
    }

    #[test]
    fn mean_threshold_is_strict() {
        let t = table(&[("v", vec![1.0, 2.0, 3.0])]);
        let stats = PopulationStats::fit(&t).unwrap();
        assert_eq!(stats.means["v"], 2.0);
        let d = mean_threshold_binarize(&t, &stats).unwrap();
        assert_eq!(d.rows().iter().map(|r| r[0]).collect::<Vec<_>>(), vec![0, 0, 1]);
        let other = table(&[("w", vec![1.0])]);
        assert!(matches!(mean_threshold_binarize(&other, &stats), Err(Error::MissingStat(_))));
    }

    #[test]
    fn half_summary_layout() {
        let s = half_summary(&[1.0, 2.0, 3.0, 10.0, 20.0, 30.0]).unwrap();
        assert_eq!(s, [2.0, 20.0, 2.0, 20.0, 1.0, 10.0, 3.0, 30.0, 2.0 / 3.0, 200.0 / 3.0]);
        assert!(half_summary(&[1.0]).is_err());
    }

    #[test]
    fn bag_of_words() {
        let docs: Vec<Vec<String>> =
            ["Graphics card, graphics!", "the card", "the end"].iter().map(|d| tokenize(d)).collect();
        assert_eq!(docs[0], ["graphics", "card", "graphics"]);
        let (vocab, d) = bow_binarize(&docs, vec![0, 1, 0], 2).unwrap();
        assert_eq!(vocab.tokens, ["card", "the"]);
        assert_eq!(d.row(0), &[1, 0]);
        let v3 = Vocabulary::fit(&docs, 3).unwrap();
        assert_eq!(v3.tokens, ["card", "the", "end"]);
        let enc = v3.encode(&[tokenize("graphics end"), tokenize("graphics end")], vec![0, 0]).unwrap();
        assert_eq!(enc.row(0), &[0, 0, 1]);
        assert_eq!(enc.row(0), enc.row(1));
        assert!(bow_binarize(&[], vec![], 2).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let t = NumericTable::new(vec!["a".into(), "b".into()], vec![vec![1.5, -2.0]], Some(vec![3])).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(NumericTable::read_csv(buf.as_slice()).unwrap(), t);
    }
}
