//! Binary-class datasets: KEEL ingestion, min-max scaling and the
//! 5×4 stratified replication splits.
//!
//! Labels are small integers assigned in order of first appearance in the
//! source file. The minority class is fixed once per source dataset and is
//! carried unchanged into every subset (splits, bootstraps, filtered sets),
//! so "minority" always means the same class across folds.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::seed::derive_seed;

/// Integer class identifier (0 or 1 for the binary problems handled here).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassLabel(pub u8);

impl ClassLabel {
    pub const ZERO: ClassLabel = ClassLabel(0);
    pub const ONE: ClassLabel = ClassLabel(1);

    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// The other class of a binary problem.
    pub fn other(self) -> ClassLabel {
        ClassLabel(1 - self.0.min(1))
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Labeled feature vectors for a two-class problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    name: String,
    features: Vec<Vec<f64>>,
    labels: Vec<ClassLabel>,
    class_names: Vec<String>,
    minority: ClassLabel,
}

impl Dataset {
    /// Builds a dataset and designates the minority class from the label
    /// counts: the rarer class, or label 0 when both counts are equal.
    pub fn new(
        name: impl Into<String>,
        features: Vec<Vec<f64>>,
        labels: Vec<ClassLabel>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        let counts = count_labels(&labels)?;
        let minority = if counts[1] < counts[0] {
            ClassLabel::ONE
        } else {
            ClassLabel::ZERO
        };
        Self::with_minority(name, features, labels, class_names, minority)
    }

    /// Builds a dataset with an explicit minority designation, used for
    /// subsets that must inherit their parent's minority class.
    pub fn with_minority(
        name: impl Into<String>,
        features: Vec<Vec<f64>>,
        labels: Vec<ClassLabel>,
        class_names: Vec<String>,
        minority: ClassLabel,
    ) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(contract(format!(
                "{} feature rows but {} labels",
                features.len(),
                labels.len()
            )));
        }
        count_labels(&labels)?;
        if minority.0 > 1 {
            return Err(contract("minority label must be 0 or 1"));
        }
        if let Some(first) = features.first() {
            let width = first.len();
            for (i, row) in features.iter().enumerate() {
                if row.len() != width {
                    return Err(contract(format!(
                        "row {i} has {} features, expected {width}",
                        row.len()
                    )));
                }
                if row.iter().any(|v| !v.is_finite()) {
                    return Err(contract(format!("row {i} contains a non-finite value")));
                }
            }
        }
        let class_names = if class_names.len() == 2 {
            class_names
        } else {
            vec!["0".to_string(), "1".to_string()]
        };
        Ok(Self {
            name: name.into(),
            features,
            labels,
            class_names,
            minority,
        })
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i]
    }

    pub fn labels(&self) -> &[ClassLabel] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> ClassLabel {
        self.labels[i]
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn class_name(&self, label: ClassLabel) -> &str {
        &self.class_names[label.index()]
    }

    pub fn minority(&self) -> ClassLabel {
        self.minority
    }

    pub fn majority(&self) -> ClassLabel {
        self.minority.other()
    }

    pub fn is_minority(&self, label: ClassLabel) -> bool {
        label == self.minority
    }

    /// Per-label sample counts, indexed by label value.
    pub fn class_counts(&self) -> [usize; 2] {
        let mut counts = [0usize; 2];
        for l in &self.labels {
            counts[l.index()] += 1;
        }
        counts
    }

    /// Class counts keyed by class name, in label order.
    pub fn class_count_map(&self) -> BTreeMap<String, usize> {
        let counts = self.class_counts();
        self.class_names
            .iter()
            .cloned()
            .zip(counts)
            .collect()
    }

    pub fn has_both_classes(&self) -> bool {
        let c = self.class_counts();
        c[0] > 0 && c[1] > 0
    }

    /// Majority count divided by minority count.
    pub fn imbalance_ratio(&self) -> f64 {
        let c = self.class_counts();
        let minority = c[self.minority.index()];
        let majority = c[self.majority().index()];
        if minority == 0 {
            f64::INFINITY
        } else {
            majority as f64 / minority as f64
        }
    }

    /// Rows at `indices`, in the given order; the minority designation is
    /// inherited.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            name: self.name.clone(),
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            class_names: self.class_names.clone(),
            minority: self.minority,
        }
    }

    /// Rows sorted by coordinates and then label, with the source row of each
    /// output row. Index tie-breaking on the result no longer depends on the
    /// order the rows arrived in.
    pub fn canonical(&self) -> (Dataset, Vec<usize>) {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| {
            self.features[a]
                .iter()
                .zip(&self.features[b])
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(self.labels[a].cmp(&self.labels[b]))
                .then(a.cmp(&b))
        });
        (self.subset(&order), order)
    }

    /// Same labels and metadata with replacement feature rows.
    fn with_features(&self, features: Vec<Vec<f64>>) -> Dataset {
        Dataset {
            features,
            ..self.clone()
        }
    }

    pub(crate) fn indices_of(&self, label: ClassLabel) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == label)
            .map(|(i, _)| i)
            .collect()
    }
}

fn count_labels(labels: &[ClassLabel]) -> Result<[usize; 2]> {
    let mut counts = [0usize; 2];
    for l in labels {
        if l.0 > 1 {
            return Err(contract(format!("label {l} is not binary")));
        }
        counts[l.index()] += 1;
    }
    Ok(counts)
}

/// Parses a KEEL `.dat` document.
///
/// Header lines (`@relation`, `@attribute`, `@inputs`, `@outputs`) precede
/// `@data`; every data row is comma separated with the class in the last
/// column. `%` lines are comments. Missing values (`?`) are rejected.
pub fn parse_keel(text: &str) -> Result<Dataset> {
    let mut name = String::new();
    let mut n_attributes = 0usize;
    let mut in_data = false;
    let mut features: Vec<Vec<f64>> = Vec::new();
    let mut raw_labels: Vec<usize> = Vec::new();
    let mut class_names: Vec<String> = Vec::new();
    let mut width: Option<usize> = None;

    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if !in_data {
            let lower = line.to_ascii_lowercase();
            let keyword = lower.split_whitespace().next().unwrap_or("");
            match keyword {
                "@relation" => {
                    name = line["@relation".len()..].trim().to_string();
                }
                "@attribute" => {
                    if line.split_whitespace().nth(1).is_none() {
                        return Err(Error::Parse {
                            line: line_no,
                            message: "attribute declaration without a name".into(),
                        });
                    }
                    n_attributes += 1;
                }
                "@inputs" | "@outputs" | "@input" | "@output" => {}
                "@data" => {
                    if n_attributes == 0 {
                        return Err(Error::Parse {
                            line: line_no,
                            message: "@data before any @attribute".into(),
                        });
                    }
                    in_data = true;
                }
                _ => {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("unexpected header line `{line}`"),
                    });
                }
            }
            continue;
        }

        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != n_attributes {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected {n_attributes} columns, found {}", cells.len()),
            });
        }
        if cells.len() < 2 {
            return Err(Error::Parse {
                line: line_no,
                message: "a row needs at least one feature and a class".into(),
            });
        }
        let (class_cell, feature_cells) = cells.split_last().expect("nonempty row");
        let mut row = Vec::with_capacity(feature_cells.len());
        for cell in feature_cells {
            if *cell == "?" || class_cell == &"?" {
                return Err(Error::Parse {
                    line: line_no,
                    message: "missing values (`?`) are not supported".into(),
                });
            }
            let value: f64 = cell.parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("non-numeric feature value `{cell}`"),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("non-finite feature value `{cell}`"),
                });
            }
            row.push(value);
        }
        if let Some(w) = width {
            debug_assert_eq!(w, row.len());
        }
        width = Some(row.len());
        let label = match class_names.iter().position(|c| c == class_cell) {
            Some(p) => p,
            None => {
                class_names.push(class_cell.to_string());
                class_names.len() - 1
            }
        };
        features.push(row);
        raw_labels.push(label);
    }

    if !in_data {
        return Err(Error::Parse {
            line: text.lines().count().max(1),
            message: "missing @data section".into(),
        });
    }
    if class_names.len() != 2 {
        return Err(Error::UnsupportedProblem(format!(
            "expected exactly 2 classes, found {}",
            class_names.len()
        )));
    }
    if name.is_empty() {
        name = "unnamed".into();
    }
    let labels = raw_labels.into_iter().map(|l| ClassLabel(l as u8)).collect();
    Dataset::new(name, features, labels, class_names)
}

/// Renders a dataset in KEEL format. `parse_keel` assigns labels by first
/// appearance, so the round trip preserves labels when row 0 has label 0.
pub fn write_keel(data: &Dataset) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    let _ = writeln!(out, "@relation {}", data.name());
    let inputs: Vec<String> = (0..data.n_features()).map(|j| format!("x{}", j + 1)).collect();
    for (j, name) in inputs.iter().enumerate() {
        let col = data.features().iter().map(|r| r[j]);
        let lo = col.clone().fold(f64::INFINITY, f64::min);
        let hi = col.fold(f64::NEG_INFINITY, f64::max);
        let _ = writeln!(out, "@attribute {name} real [{lo}, {hi}]");
    }
    let _ = writeln!(out, "@attribute Class {{{}}}", data.class_names().join(", "));
    let _ = writeln!(out, "@inputs {}", inputs.join(", "));
    let _ = writeln!(out, "@outputs Class");
    let _ = writeln!(out, "@data");
    for (row, label) in data.features().iter().zip(data.labels()) {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "{}, {}", cells.join(", "), data.class_name(*label));
    }
    out
}

/// Per-feature bounds fitted on a training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit(train: &Dataset) -> Self {
        let d = train.n_features();
        let mut min = vec![f64::INFINITY; d];
        let mut max = vec![f64::NEG_INFINITY; d];
        for row in train.features() {
            for (j, &v) in row.iter().enumerate() {
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
        Self { min, max }
    }

    /// Maps a value into [0, 1]; constant columns map to 0.
    pub fn scale_value(&self, j: usize, v: f64) -> f64 {
        let span = self.max[j] - self.min[j];
        if span <= 0.0 || !span.is_finite() {
            0.0
        } else {
            ((v - self.min[j]) / span).clamp(0.0, 1.0)
        }
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .enumerate()
            .map(|(j, &v)| self.scale_value(j, v))
            .collect()
    }

    pub fn transform(&self, data: &Dataset) -> Dataset {
        data.with_features(data.features().iter().map(|r| self.transform_row(r)).collect())
    }
}

/// Fits min-max bounds on `train` alone and rescales `train` and every set in
/// `others` with them.
pub fn minmax_fit_apply(train: &Dataset, others: &[Dataset]) -> Result<(Dataset, Vec<Dataset>)> {
    if train.is_empty() {
        return Err(contract("cannot fit scaling on an empty training set"));
    }
    let scaler = MinMaxScaler::fit(train);
    for o in others {
        if !o.is_empty() && o.n_features() != train.n_features() {
            return Err(contract(format!(
                "feature count mismatch: train has {}, other set has {}",
                train.n_features(),
                o.n_features()
            )));
        }
    }
    Ok((
        scaler.transform(train),
        others.iter().map(|o| scaler.transform(o)).collect(),
    ))
}

/// One of the 20 train / validation / test partitions of a dataset.
#[derive(Debug, Clone)]
pub struct ReplicationSplit {
    pub replication_id: usize,
    pub seed: u64,
    pub train: Dataset,
    pub validation: Dataset,
    pub test: Dataset,
    pub train_indices: Vec<usize>,
    pub validation_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

pub const OUTER_FOLDS: usize = 5;
pub const INNER_FOLDS: usize = 4;
pub const REPLICATIONS: usize = OUTER_FOLDS * INNER_FOLDS;

/// Stratified fold assignment over `indices` (positions into `data`).
///
/// Each class is shuffled with the seeded generator and dealt round-robin
/// starting at fold 0, so remainders land in the lowest-indexed folds.
pub fn stratified_folds(data: &Dataset, indices: &[usize], n_folds: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); n_folds];
    for label in [ClassLabel::ZERO, ClassLabel::ONE] {
        let mut members: Vec<usize> = indices
            .iter()
            .copied()
            .filter(|&i| data.label(i) == label)
            .collect();
        members.shuffle(&mut rng);
        for (pos, idx) in members.into_iter().enumerate() {
            folds[pos % n_folds].push(idx);
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    folds
}

/// Stratified 5-fold outer split, each outer training part split again by a
/// stratified 4-fold into training and validation: 20 replications with
/// roughly 60 / 20 / 20 proportions.
pub fn make_replications(data: &Dataset, seed: u64) -> Result<Vec<ReplicationSplit>> {
    let counts = data.class_counts();
    for label in [ClassLabel::ZERO, ClassLabel::ONE] {
        if counts[label.index()] < OUTER_FOLDS {
            return Err(Error::InsufficientData {
                class: data.class_name(label).to_string(),
                count: counts[label.index()],
                required: OUTER_FOLDS,
            });
        }
    }

    let all: Vec<usize> = (0..data.len()).collect();
    let outer = stratified_folds(data, &all, OUTER_FOLDS, seed);
    let mut splits = Vec::with_capacity(REPLICATIONS);
    for (f, test_idx) in outer.iter().enumerate() {
        let rest: Vec<usize> = outer
            .iter()
            .enumerate()
            .filter(|(g, _)| *g != f)
            .flat_map(|(_, fold)| fold.iter().copied())
            .collect();
        let inner_seed = derive_seed(seed, f as u64 + 1);
        let inner = stratified_folds(data, &rest, INNER_FOLDS, inner_seed);
        for (v, val_idx) in inner.iter().enumerate() {
            let mut train_idx: Vec<usize> = inner
                .iter()
                .enumerate()
                .filter(|(g, _)| *g != v)
                .flat_map(|(_, fold)| fold.iter().copied())
                .collect();
            train_idx.sort_unstable();
            splits.push(ReplicationSplit {
                replication_id: f * INNER_FOLDS + v,
                seed,
                train: data.subset(&train_idx),
                validation: data.subset(val_idx),
                test: data.subset(test_idx),
                train_indices: train_idx,
                validation_indices: val_idx.clone(),
                test_indices: test_idx.clone(),
            });
        }
    }
    Ok(splits)
}
