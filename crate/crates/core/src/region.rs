//! Regions of competence: plain KNN and the class-balanced KNNE variant.

use serde::{Deserialize, Serialize};

use crate::dataset::{ClassLabel, Dataset};
use crate::error::{contract, Error, Result};

/// Default neighborhood size; for KNNE this is per class.
pub const DEFAULT_K: usize = 7;

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionMember {
    /// Row index into the dataset the region was drawn from.
    pub index: usize,
    pub label: ClassLabel,
    pub distance: f64,
    pub features: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionOfCompetence {
    /// Ascending by (distance, index).
    pub members: Vec<RegionMember>,
    pub k_requested: usize,
    pub query: Vec<f64>,
    /// Per-class count of samples missing from a KNNE region because the
    /// class had fewer than `k` samples. Always zero for KNN.
    pub shortfall: [usize; 2],
}

impl RegionOfCompetence {
    /// Builds a region directly from members; they are re-sorted.
    pub fn from_members(query: Vec<f64>, mut members: Vec<RegionMember>, k_requested: usize) -> Self {
        sort_members(&mut members);
        Self {
            members,
            k_requested,
            query,
            shortfall: [0, 0],
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn indices(&self) -> Vec<usize> {
        self.members.iter().map(|m| m.index).collect()
    }

    pub fn class_counts(&self) -> [usize; 2] {
        let mut c = [0, 0];
        for m in &self.members {
            c[m.label.index()] += 1;
        }
        c
    }

    pub fn has_both_classes(&self) -> bool {
        let c = self.class_counts();
        c[0] > 0 && c[1] > 0
    }

    pub fn has_shortfall(&self) -> bool {
        self.shortfall.iter().any(|&s| s > 0)
    }

    /// The region restricted to its `r` nearest members.
    pub fn truncated(&self, r: usize) -> RegionOfCompetence {
        RegionOfCompetence {
            members: self.members[..r.min(self.members.len())].to_vec(),
            k_requested: self.k_requested,
            query: self.query.clone(),
            shortfall: self.shortfall,
        }
    }
}

fn sort_members(members: &mut [RegionMember]) {
    members.sort_by(|a, b| a.distance.total_cmp(&b.distance).then(a.index.cmp(&b.index)));
}

fn ranked(dsel: &Dataset, query: &[f64], rows: impl Iterator<Item = usize>) -> Result<Vec<RegionMember>> {
    if dsel.n_features() != query.len() && !dsel.is_empty() {
        return Err(contract(format!(
            "query has {} features, dataset has {}",
            query.len(),
            dsel.n_features()
        )));
    }
    let mut members: Vec<RegionMember> = rows
        .map(|i| RegionMember {
            index: i,
            label: dsel.label(i),
            distance: euclidean(dsel.row(i), query),
            features: dsel.row(i).to_vec(),
        })
        .collect();
    sort_members(&mut members);
    Ok(members)
}

/// The `k` globally nearest samples; distance ties go to the lower index.
pub fn knn_region(dsel: &Dataset, query: &[f64], k: usize) -> Result<RegionOfCompetence> {
    if k == 0 {
        return Err(contract("k must be at least 1"));
    }
    if dsel.len() < k {
        return Err(Error::InsufficientNeighbors {
            requested: k,
            available: dsel.len(),
        });
    }
    let mut members = ranked(dsel, query, 0..dsel.len())?;
    members.truncate(k);
    Ok(RegionOfCompetence {
        members,
        k_requested: k,
        query: query.to_vec(),
        shortfall: [0, 0],
    })
}

/// The `k` nearest samples of each class, merged in ascending distance.
/// A class with fewer than `k` samples contributes all of them.
pub fn knne_region(dsel: &Dataset, query: &[f64], k: usize) -> Result<RegionOfCompetence> {
    if k == 0 {
        return Err(contract("k must be at least 1"));
    }
    if !dsel.has_both_classes() {
        return Err(contract("KNNE needs samples of both classes"));
    }
    let mut members = Vec::with_capacity(2 * k);
    let mut shortfall = [0usize; 2];
    for label in [ClassLabel::ZERO, ClassLabel::ONE] {
        let rows = dsel.indices_of(label);
        shortfall[label.index()] = k.saturating_sub(rows.len());
        let mut block = ranked(dsel, query, rows.into_iter())?;
        block.truncate(k);
        members.extend(block);
    }
    sort_members(&mut members);
    Ok(RegionOfCompetence {
        members,
        k_requested: k,
        query: query.to_vec(),
        shortfall,
    })
}
