//! Dynamic frienemy pruning: keep only classifiers whose decision boundary
//! passes between some pair of differently labelled region members.

use serde::{Deserialize, Serialize};

use crate::generation::Perceptron;
use crate::region::RegionOfCompetence;

/// Cross-class pairs of region members, as positions into the region.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrienemySet {
    pub pairs: Vec<(usize, usize)>,
}

impl FrienemySet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

pub fn frienemy_pairs(roc: &RegionOfCompetence) -> FrienemySet {
    let m = &roc.members;
    let mut pairs = Vec::new();
    for a in 0..m.len() {
        for b in (a + 1)..m.len() {
            if m[a].label != m[b].label {
                pairs.push((a, b));
            }
        }
    }
    FrienemySet { pairs }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrunedPool {
    /// Positions into the pool slice handed to [`dfp_prune`], ascending.
    pub selected: Vec<usize>,
    pub fallback_used: bool,
}

/// Keeps classifier `i` iff it is correct on both members of at least one
/// frienemy pair. Falls back to the whole pool when nothing qualifies,
/// which also covers single-class regions.
pub fn dfp_prune(roc: &RegionOfCompetence, pool: &[&Perceptron]) -> PrunedPool {
    let pairs = frienemy_pairs(roc);
    let mut selected = Vec::new();
    if !pairs.is_empty() {
        for (i, clf) in pool.iter().enumerate() {
            let correct: Vec<bool> = roc
                .members
                .iter()
                .map(|m| clf.predict(&m.features) == m.label)
                .collect();
            if pairs.pairs.iter().any(|&(a, b)| correct[a] && correct[b]) {
                selected.push(i);
            }
        }
    }
    if selected.is_empty() {
        PrunedPool {
            selected: (0..pool.len()).collect(),
            fallback_used: true,
        }
    } else {
        PrunedPool {
            selected,
            fallback_used: false,
        }
    }
}
