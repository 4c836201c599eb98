use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};

/// Ranks of `scores`, 1 for the highest, ties sharing their average rank.
pub fn rank_descending(scores: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut ranks = vec![0.0; scores.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Sizes of the groups of equal values in `values`.
pub(crate) fn tie_groups(values: &[f64]) -> Vec<usize> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mut groups = Vec::new();
    let mut i = 0;
    while i < v.len() {
        let mut j = i;
        while j + 1 < v.len() && v[j + 1] == v[i] {
            j += 1;
        }
        groups.push(j - i + 1);
        i = j + 1;
    }
    groups
}

/// Scores of `k` methods over `N` blocks with per-block ranks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankTable {
    pub methods: Vec<String>,
    pub blocks: Vec<String>,
    pub scores: Vec<Vec<f64>>,
    pub ranks: Vec<Vec<f64>>,
}

impl RankTable {
    /// `scores[b][m]` is the score of method `m` on block `b`; higher is better.
    pub fn new(methods: Vec<String>, blocks: Vec<String>, scores: Vec<Vec<f64>>) -> Result<Self> {
        if scores.len() != blocks.len() {
            return Err(contract(format!(
                "{} score rows for {} blocks",
                scores.len(),
                blocks.len()
            )));
        }
        for (b, row) in scores.iter().enumerate() {
            if row.len() != methods.len() {
                return Err(contract(format!(
                    "block `{}` has {} scores for {} methods",
                    blocks[b],
                    row.len(),
                    methods.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(contract(format!("block `{}` has a non-finite score", blocks[b])));
            }
        }
        let ranks = scores.iter().map(|r| rank_descending(r)).collect();
        Ok(Self {
            methods,
            blocks,
            scores,
            ranks,
        })
    }

    pub fn k(&self) -> usize {
        self.methods.len()
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn average_ranks(&self) -> Vec<f64> {
        let n = self.n_blocks().max(1) as f64;
        (0..self.k())
            .map(|m| self.ranks.iter().map(|r| r[m]).sum::<f64>() / n)
            .collect()
    }

    /// Scores of one method across blocks.
    pub fn column(&self, m: usize) -> Vec<f64> {
        self.scores.iter().map(|r| r[m]).collect()
    }

    pub fn method_index(&self, name: &str) -> Option<usize> {
        self.methods.iter().position(|m| m == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_with_ties() {
        assert_eq!(rank_descending(&[0.9, 0.5, 0.7]), vec![1.0, 3.0, 2.0]);
        assert_eq!(rank_descending(&[0.5, 0.5, 0.7, 0.1]), vec![2.5, 2.5, 1.0, 4.0]);
        assert_eq!(rank_descending(&[1.0; 4]), vec![2.5; 4]);
    }

    #[test]
    fn tie_group_sizes() {
        assert_eq!(tie_groups(&[1.0, 2.0, 1.0, 3.0, 2.0, 1.0]), vec![3, 2, 1]);
    }

    #[test]
    fn table_shape_checked() {
        let m = vec!["a".to_string(), "b".to_string()];
        assert!(RankTable::new(m.clone(), vec!["x".into()], vec![vec![1.0]]).is_err());
        let t = RankTable::new(m, vec!["x".into(), "y".into()], vec![vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(t.average_ranks(), vec![1.25, 1.75]);
    }
}
