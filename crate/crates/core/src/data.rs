//! Binary datasets: rows of 0/1 features with integer labels and stable row ids.

use std::collections::{BTreeMap, HashSet};
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const LABEL_COLUMN: &str = "label";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryDataset {
    feature_names: Vec<String>,
    rows: Vec<Vec<u8>>,
    labels: Vec<u32>,
    ids: Vec<u64>,
}

/// Default feature names `x0, x1, ..`.
pub fn default_feature_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("x{i}")).collect()
}

impl BinaryDataset {
    /// Builds a dataset whose row ids are the row positions.
    pub fn new(feature_names: Vec<String>, rows: Vec<Vec<u8>>, labels: Vec<u32>) -> Result<Self> {
        let ids = (0..rows.len() as u64).collect();
        Self::with_ids(feature_names, rows, labels, ids)
    }

    pub fn with_ids(
        feature_names: Vec<String>,
        rows: Vec<Vec<u8>>,
        labels: Vec<u32>,
        ids: Vec<u64>,
    ) -> Result<Self> {
        if rows.len() != labels.len() || rows.len() != ids.len() {
            return Err(Error::Format(format!(
                "{} rows, {} labels, {} ids",
                rows.len(),
                labels.len(),
                ids.len()
            )));
        }
        let f = feature_names.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != f {
                return Err(Error::Dimension { expected: f, got: row.len() });
            }
            if let Some(v) = row.iter().find(|&&v| v > 1) {
                return Err(Error::Format(format!("row {i}: feature value {v} is not binary")));
            }
        }
        Ok(BinaryDataset { feature_names, rows, labels, ids })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn num_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<u8>] {
        &self.rows
    }

    pub fn label(&self, i: usize) -> u32 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn id(&self, i: usize) -> u64 {
        self.ids[i]
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[u8], u32)> + '_ {
        self.rows.iter().map(Vec::as_slice).zip(self.labels.iter().copied())
    }

    /// Sorted distinct labels.
    pub fn classes(&self) -> Vec<u32> {
        self.class_counts().into_keys().collect()
    }

    pub fn class_counts(&self) -> BTreeMap<u32, usize> {
        let mut counts = BTreeMap::new();
        for &l in &self.labels {
            *counts.entry(l).or_insert(0) += 1;
        }
        counts
    }

    /// Rows at the given positions, keeping their ids.
    pub fn subset(&self, positions: &[usize]) -> BinaryDataset {
        BinaryDataset {
            feature_names: self.feature_names.clone(),
            rows: positions.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: positions.iter().map(|&i| self.labels[i]).collect(),
            ids: positions.iter().map(|&i| self.ids[i]).collect(),
        }
    }

    /// Rows whose position is not in `positions`.
    pub fn without(&self, positions: &[usize]) -> BinaryDataset {
        let drop: HashSet<usize> = positions.iter().copied().collect();
        let keep: Vec<usize> = (0..self.len()).filter(|i| !drop.contains(i)).collect();
        self.subset(&keep)
    }

    pub fn filter_labels(&self, keep: &[u32]) -> BinaryDataset {
        let positions: Vec<usize> =
            (0..self.len()).filter(|&i| keep.contains(&self.labels[i])).collect();
        self.subset(&positions)
    }

    /// Appends a row; the caller chooses its id.
    pub fn push(&mut self, row: Vec<u8>, label: u32, id: u64) -> Result<()> {
        if row.len() != self.num_features() {
            return Err(Error::Dimension { expected: self.num_features(), got: row.len() });
        }
        if row.iter().any(|&v| v > 1) {
            return Err(Error::Format("feature value is not binary".into()));
        }
        self.rows.push(row);
        self.labels.push(label);
        self.ids.push(id);
        Ok(())
    }

    pub fn set_label(&mut self, i: usize, label: u32) {
        self.labels[i] = label;
    }

    /// Concatenates two datasets over the same feature space, keeping ids.
    pub fn concat(&self, other: &BinaryDataset) -> Result<BinaryDataset> {
        if self.feature_names != other.feature_names {
            return Err(Error::Dimension { expected: self.num_features(), got: other.num_features() });
        }
        let mut out = self.clone();
        out.rows.extend(other.rows.iter().cloned());
        out.labels.extend_from_slice(&other.labels);
        out.ids.extend_from_slice(&other.ids);
        Ok(out)
    }

    pub fn next_id(&self) -> u64 {
        self.ids.iter().max().map_or(0, |m| m + 1)
    }

    /// CSV: header of feature names followed by `label`; one 0/1 cell per feature.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = self.feature_names.iter().map(String::as_str).collect();
        header.push(LABEL_COLUMN);
        w.write_record(&header)?;
        let mut record: Vec<String> = Vec::with_capacity(header.len());
        for (row, label) in self.iter() {
            record.clear();
            record.extend(row.iter().map(|b| b.to_string()));
            record.push(label.to_string());
            w.write_record(&record)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let header = r.headers()?.clone();
        let Some(last) = header.iter().next_back() else {
            return Err(Error::Format("missing header row".into()));
        };
        if last != LABEL_COLUMN {
            return Err(Error::Format(format!("last column must be `{LABEL_COLUMN}`, found `{last}`")));
        }
        let f = header.len() - 1;
        let names: Vec<String> = header.iter().take(f).map(str::to_owned).collect();
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            if rec.len() != f + 1 {
                return Err(Error::Format(format!("record {}: expected {} cells", line + 1, f + 1)));
            }
            let mut row = Vec::with_capacity(f);
            for cell in rec.iter().take(f) {
                match cell.trim() {
                    "0" => row.push(0),
                    "1" => row.push(1),
                    other => {
                        return Err(Error::Format(format!(
                            "record {}: `{other}` is not 0 or 1",
                            line + 1
                        )))
                    }
                }
            }
            let label = rec[f]
                .trim()
                .parse::<u32>()
                .map_err(|_| Error::Format(format!("record {}: bad label `{}`", line + 1, &rec[f])))?;
            rows.push(row);
            labels.push(label);
        }
        BinaryDataset::new(names, rows, labels)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        crate::io::write_atomic(path, &buf)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(std::io::BufReader::new(file))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> BinaryDataset {
        BinaryDataset::new(
            vec!["a".into(), "b,c".into()],
            vec![vec![0, 1], vec![1, 1], vec![1, 0]],
            vec![0, 1, 1],
        )
        .unwrap()
    }

    #[test]
    fn csv_round_trip_keeps_quoted_names() {
        let d = toy();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("a,\"b,c\",label\n"));
        assert_eq!(BinaryDataset::read_csv(buf.as_slice()).unwrap(), d);
    }

    #[test]
    fn rejects_non_binary_cells() {
        let err = BinaryDataset::read_csv("a,label\n2,0\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Format(_)));
    }

    #[test]
    fn rejects_missing_label_column() {
        assert!(BinaryDataset::read_csv("a,b\n0,1\n".as_bytes()).is_err());
    }

    #[test]
    fn subset_keeps_ids() {
        let d = toy();
        let s = d.subset(&[2, 0]);
        assert_eq!(s.ids(), &[2, 0]);
        assert_eq!(s.without(&[0]).ids(), &[0]);
        assert_eq!(d.class_counts().get(&1), Some(&2));
    }
}
