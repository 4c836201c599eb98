//! Edition-based prototype selection over the validation set.
//!
//! Both filters only ever remove majority-class samples, and both decide every
//! removal against the unfiltered set in a single pass.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{ClassLabel, Dataset};
use crate::error::{contract, Error, Result};
use crate::region::euclidean;

/// Default neighborhood size for ENN.
pub const DEFAULT_ENN_K: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterKind {
    Enn,
    Rng,
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FilterKind::Enn => "enn",
            FilterKind::Rng => "rng",
        })
    }
}

impl FromStr for FilterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "enn" => Ok(FilterKind::Enn),
            "rng" => Ok(FilterKind::Rng),
            other => Err(Error::Unsupported(format!("unknown filter `{other}`"))),
        }
    }
}

/// Relative neighborhood graph over the rows of a dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProximityGraph {
    adjacency: Vec<Vec<usize>>,
}

impl ProximityGraph {
    pub fn n_vertices(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i].binary_search(&j).is_ok()
    }

    /// Edges as `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, adj)| adj.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
            .collect()
    }
}

#[allow(clippy::needless_range_loop)]
pub(crate) fn distance_matrix(data: &Dataset) -> Vec<Vec<f64>> {
    let n = data.len();
    let mut dist = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = euclidean(data.row(i), data.row(j));
            dist[i][j] = d;
            dist[j][i] = d;
        }
    }
    dist
}

/// Connects `(i, j)` iff no third sample `k` has
/// `max(d(i,k), d(j,k)) < d(i,j)`, i.e. the lune of the pair is empty.
pub fn build_proximity_graph(dsel: &Dataset) -> Result<ProximityGraph> {
    let n = dsel.len();
    if n < 2 {
        return Err(contract("a proximity graph needs at least 2 samples"));
    }
    let dist = distance_matrix(dsel);
    let mut adjacency = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            let dij = dist[i][j];
            let blocked = (0..n)
                .filter(|&k| k != i && k != j)
                .any(|k| dij > dist[i][k].max(dist[j][k]));
            if !blocked {
                adjacency[i].push(j);
                adjacency[j].push(i);
            }
        }
    }
    for adj in &mut adjacency {
        adj.sort_unstable();
    }
    Ok(ProximityGraph { adjacency })
}

/// Which samples a filter kept and removed, by position in its input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterReport {
    pub kind: FilterKind,
    pub before: [usize; 2],
    pub after: [usize; 2],
    pub kept: Vec<usize>,
    pub removed: Vec<usize>,
    /// Set when the all-majority-removed guard restored a sample.
    pub guard_applied: bool,
}

impl FilterReport {
    pub fn apply(&self, dsel: &Dataset) -> Dataset {
        dsel.subset(&self.kept)
    }
}

/// Per-sample vote outcome: whether the neighborhood contradicts the sample,
/// and the fraction of neighbors that share its label.
struct Verdict {
    contradicted: bool,
    agreement: f64,
}

fn vote(own: ClassLabel, neighbor_labels: impl Iterator<Item = ClassLabel>) -> Verdict {
    let mut counts = [0usize; 2];
    for l in neighbor_labels {
        counts[l.index()] += 1;
    }
    let total = counts[0] + counts[1];
    if total == 0 {
        return Verdict {
            contradicted: false,
            agreement: 1.0,
        };
    }
    let same = counts[own.index()];
    let other = counts[own.other().index()];
    Verdict {
        // Ties count as agreement.
        contradicted: other > same,
        agreement: same as f64 / total as f64,
    }
}

fn finish(kind: FilterKind, dsel: &Dataset, verdicts: &[Verdict]) -> FilterReport {
    let majority = dsel.majority();
    let mut removed: Vec<usize> = (0..dsel.len())
        .filter(|&i| dsel.label(i) == majority && verdicts[i].contradicted)
        .collect();

    let majority_total = dsel.class_counts()[majority.index()];
    let mut guard_applied = false;
    if majority_total > 0 && removed.len() == majority_total {
        // Keep the most self-consistent majority sample, lowest index on ties.
        let keep = removed
            .iter()
            .copied()
            .fold(None::<usize>, |best, i| match best {
                Some(b) if verdicts[b].agreement >= verdicts[i].agreement => Some(b),
                _ => Some(i),
            })
            .expect("nonempty");
        removed.retain(|&i| i != keep);
        guard_applied = true;
    }

    let kept: Vec<usize> = (0..dsel.len()).filter(|i| removed.binary_search(i).is_err()).collect();
    let mut after = [0usize; 2];
    for &i in &kept {
        after[dsel.label(i).index()] += 1;
    }
    FilterReport {
        kind,
        before: dsel.class_counts(),
        after,
        kept,
        removed,
        guard_applied,
    }
}

fn require_both_classes(dsel: &Dataset) -> Result<()> {
    if !dsel.has_both_classes() {
        return Err(contract("filtering needs samples of both classes"));
    }
    Ok(())
}

/// RNG edition: a majority-class sample is removed when the most frequent
/// label among its relative neighbors differs from its own.
pub fn rng_select(dsel: &Dataset) -> Result<FilterReport> {
    require_both_classes(dsel)?;
    let graph = build_proximity_graph(dsel)?;
    let verdicts: Vec<Verdict> = (0..dsel.len())
        .map(|i| vote(dsel.label(i), graph.neighbors(i).iter().map(|&j| dsel.label(j))))
        .collect();
    Ok(finish(FilterKind::Rng, dsel, &verdicts))
}

pub fn rng_filter(dsel: &Dataset) -> Result<Dataset> {
    Ok(rng_select(dsel)?.apply(dsel))
}

/// The `k` nearest rows to row `i` of `data`, excluding `i` itself; distance
/// ties go to the lower index.
pub(crate) fn nearest_excluding(dist: &[Vec<f64>], i: usize, k: usize) -> Vec<usize> {
    let mut others: Vec<usize> = (0..dist.len()).filter(|&j| j != i).collect();
    others.sort_by(|&a, &b| dist[i][a].total_cmp(&dist[i][b]).then(a.cmp(&b)));
    others.truncate(k);
    others
}

/// ENN edition: a majority-class sample is removed when the majority label
/// among its `k` nearest neighbors in the unfiltered set differs from its own.
pub fn enn_select(dsel: &Dataset, k: usize) -> Result<FilterReport> {
    if k == 0 {
        return Err(contract("ENN needs k >= 1"));
    }
    if dsel.len() < k + 1 {
        return Err(contract(format!(
            "ENN with k = {k} needs at least {} samples, got {}",
            k + 1,
            dsel.len()
        )));
    }
    require_both_classes(dsel)?;
    let dist = distance_matrix(dsel);
    let verdicts: Vec<Verdict> = (0..dsel.len())
        .map(|i| {
            let nn = nearest_excluding(&dist, i, k);
            vote(dsel.label(i), nn.iter().map(|&j| dsel.label(j)))
        })
        .collect();
    Ok(finish(FilterKind::Enn, dsel, &verdicts))
}

pub fn enn_filter(dsel: &Dataset, k: usize) -> Result<Dataset> {
    Ok(enn_select(dsel, k)?.apply(dsel))
}

/// Dispatches to the requested filter.
pub fn filter_select(kind: FilterKind, dsel: &Dataset, enn_k: usize) -> Result<FilterReport> {
    match kind {
        FilterKind::Enn => enn_select(dsel, enn_k),
        FilterKind::Rng => rng_select(dsel),
    }
}
