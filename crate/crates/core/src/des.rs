//! Dynamic selection techniques and their combiners.
//!
//! Every function takes the (possibly pruned) pool as a slice of classifier
//! references. Competence vectors are aligned with slice positions, while
//! `Decision::selected_indices` carries each classifier's own pool index so
//! callers can trace selections back to the unpruned pool.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::ClassLabel;
use crate::error::{contract, Error, Result};
use crate::generation::Perceptron;
use crate::region::RegionOfCompetence;

const MIN_DISTANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Technique {
    #[serde(rename = "OLA")]
    Ola,
    #[serde(rename = "LCA")]
    Lca,
    #[serde(rename = "APRI")]
    APriori,
    #[serde(rename = "APOS")]
    APosteriori,
    #[serde(rename = "MCB")]
    Mcb,
    #[serde(rename = "DSKNN")]
    DesKnn,
    #[serde(rename = "KNU")]
    KnoraU,
    #[serde(rename = "KNE")]
    KnoraE,
}

impl Technique {
    pub const ALL: [Technique; 8] = [
        Technique::Ola,
        Technique::Lca,
        Technique::APriori,
        Technique::APosteriori,
        Technique::Mcb,
        Technique::DesKnn,
        Technique::KnoraU,
        Technique::KnoraE,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Technique::Ola => "OLA",
            Technique::Lca => "LCA",
            Technique::APriori => "APRI",
            Technique::APosteriori => "APOS",
            Technique::Mcb => "MCB",
            Technique::DesKnn => "DSKNN",
            Technique::KnoraU => "KNU",
            Technique::KnoraE => "KNE",
        }
    }
}

impl fmt::Display for Technique {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Technique {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = match s.trim().to_ascii_uppercase().replace(['-', '_'], "").as_str() {
            "OLA" => Technique::Ola,
            "LCA" => Technique::Lca,
            "APRI" | "APRIORI" => Technique::APriori,
            "APOS" | "APOSTERIORI" => Technique::APosteriori,
            "MCB" => Technique::Mcb,
            "DSKNN" | "DESKNN" => Technique::DesKnn,
            "KNU" | "KNORAU" => Technique::KnoraU,
            "KNE" | "KNORAE" => Technique::KnoraE,
            _ => return Err(contract(format!("unknown technique `{s}`"))),
        };
        Ok(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesParams {
    pub mcb_sim_threshold: f64,
    pub mcb_diff_threshold: f64,
    pub desknn_pct_accuracy: f64,
    pub desknn_pct_diversity: f64,
    /// Positive class for scores and the winner of vote ties.
    pub minority: ClassLabel,
}

impl Default for DesParams {
    fn default() -> Self {
        Self {
            mcb_sim_threshold: 0.7,
            mcb_diff_threshold: 0.1,
            desknn_pct_accuracy: 0.5,
            desknn_pct_diversity: 0.3,
            minority: ClassLabel::ZERO,
        }
    }
}

impl DesParams {
    pub fn with_minority(self, minority: ClassLabel) -> Self {
        Self { minority, ..self }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompetenceVector(pub Vec<f64>);

impl CompetenceVector {
    /// Position of the highest score; ties go to the lower position.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &s) in self.0.iter().enumerate() {
            if s > self.0[best] {
                best = i;
            }
        }
        best
    }

    pub fn scores(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub label: ClassLabel,
    /// Support for the minority class in [0, 1].
    pub positive_score: f64,
    pub selected_indices: Vec<usize>,
}

fn check_inputs(pool: &[&Perceptron], roc: &RegionOfCompetence) -> Result<()> {
    if pool.is_empty() {
        return Err(contract("the classifier pool is empty"));
    }
    if roc.is_empty() {
        return Err(contract("the region of competence is empty"));
    }
    Ok(())
}

fn weight(distance: f64) -> f64 {
    1.0 / distance.max(MIN_DISTANCE)
}

/// `correct[i][j]`: classifier `i` predicts member `j` correctly.
pub fn correctness(pool: &[&Perceptron], roc: &RegionOfCompetence) -> Vec<Vec<bool>> {
    pool.iter()
        .map(|c| roc.members.iter().map(|m| c.predict(&m.features) == m.label).collect())
        .collect()
}

fn count_correct(row: &[bool]) -> usize {
    row.iter().filter(|&&b| b).count()
}

/// Overall local accuracy.
pub fn ola(pool: &[&Perceptron], roc: &RegionOfCompetence) -> CompetenceVector {
    let n = roc.len().max(1) as f64;
    CompetenceVector(
        correctness(pool, roc)
            .iter()
            .map(|row| count_correct(row) as f64 / n)
            .collect(),
    )
}

/// Local class accuracy, restricted to members of the class the classifier
/// predicts for the query.
pub fn lca(pool: &[&Perceptron], roc: &RegionOfCompetence, query: &[f64]) -> CompetenceVector {
    CompetenceVector(
        pool.iter()
            .map(|c| {
                let w = c.predict(query);
                let of_class: Vec<_> = roc.members.iter().filter(|m| m.label == w).collect();
                if of_class.is_empty() {
                    return 0.0;
                }
                let hit = of_class.iter().filter(|m| c.predict(&m.features) == w).count();
                hit as f64 / of_class.len() as f64
            })
            .collect(),
    )
}

/// Distance-weighted mean posterior of each member's true class.
pub fn a_priori(pool: &[&Perceptron], roc: &RegionOfCompetence) -> CompetenceVector {
    let total: f64 = roc.members.iter().map(|m| weight(m.distance)).sum();
    CompetenceVector(
        pool.iter()
            .map(|c| {
                let s: f64 = roc
                    .members
                    .iter()
                    .map(|m| c.proba_of(&m.features, m.label) * weight(m.distance))
                    .sum();
                s / total
            })
            .collect(),
    )
}

/// Weighted share of the posterior mass for the predicted class that falls on
/// members actually belonging to that class.
pub fn a_posteriori(pool: &[&Perceptron], roc: &RegionOfCompetence, query: &[f64]) -> CompetenceVector {
    CompetenceVector(
        pool.iter()
            .map(|c| {
                let w = c.predict(query);
                let mut num = 0.0;
                let mut den = 0.0;
                for m in &roc.members {
                    let p = c.proba_of(&m.features, w) * weight(m.distance);
                    den += p;
                    if m.label == w {
                        num += p;
                    }
                }
                if den < MIN_DISTANCE {
                    0.0
                } else {
                    num / den
                }
            })
            .collect(),
    )
}

fn single(pool: &[&Perceptron], pos: usize, query: &[f64], minority: ClassLabel) -> Decision {
    let c = pool[pos];
    Decision {
        label: c.predict(query),
        positive_score: c.proba_of(query, minority),
        selected_indices: vec![c.index],
    }
}

/// Weighted majority vote over `positions`; ties go to the minority class.
fn vote(pool: &[&Perceptron], positions: &[usize], weights: &[f64], query: &[f64], minority: ClassLabel) -> Decision {
    let mut support = [0.0f64; 2];
    for (&p, &w) in positions.iter().zip(weights) {
        support[pool[p].predict(query).index()] += w;
    }
    let pos = support[minority.index()];
    let neg = support[minority.other().index()];
    let total = pos + neg;
    Decision {
        label: if pos >= neg { minority } else { minority.other() },
        positive_score: if total > 0.0 { pos / total } else { 0.5 },
        selected_indices: positions.iter().map(|&p| pool[p].index).collect(),
    }
}

fn plain_vote(pool: &[&Perceptron], positions: &[usize], query: &[f64], minority: ClassLabel) -> Decision {
    vote(pool, positions, &vec![1.0; positions.len()], query, minority)
}

fn everyone(pool: &[&Perceptron]) -> Vec<usize> {
    (0..pool.len()).collect()
}

/// Position of the single winner when it beats every other score by more than
/// `diff_threshold`.
pub fn dominant(scores: &[f64], diff_threshold: f64) -> Option<usize> {
    let best = CompetenceVector(scores.to_vec()).argmax();
    scores
        .iter()
        .enumerate()
        .all(|(i, &s)| i == best || scores[best] - s > diff_threshold)
        .then_some(best)
}

/// Multiple classifier behaviour: OLA on the members whose behaviour vector
/// resembles the query's, then a single winner or the whole pool.
pub fn mcb(
    pool: &[&Perceptron],
    roc: &RegionOfCompetence,
    query: &[f64],
    sim_threshold: f64,
    diff_threshold: f64,
    minority: ClassLabel,
) -> Result<Decision> {
    check_inputs(pool, roc)?;
    let query_bkv: Vec<ClassLabel> = pool.iter().map(|c| c.predict(query)).collect();
    let similar: Vec<_> = roc
        .members
        .iter()
        .filter(|m| {
            let same = pool
                .iter()
                .zip(&query_bkv)
                .filter(|(c, &q)| c.predict(&m.features) == q)
                .count();
            same as f64 / pool.len() as f64 >= sim_threshold
        })
        .cloned()
        .collect();
    let filtered = if similar.is_empty() {
        roc.clone()
    } else {
        RegionOfCompetence::from_members(roc.query.clone(), similar, roc.k_requested)
    };
    let scores = ola(pool, &filtered);
    Ok(match dominant(scores.scores(), diff_threshold) {
        Some(best) => single(pool, best, query, minority),
        None => plain_vote(pool, &everyone(pool), query, minority),
    })
}

fn ceil_fraction(fraction: f64, n: usize) -> usize {
    // Guards against products like 0.3 * 100 = 30.000000000000004.
    ((fraction * n as f64) - 1e-9).ceil().max(1.0) as usize
}

/// Double-fault rate of two correctness rows.
pub fn double_fault(a: &[bool], b: &[bool]) -> f64 {
    let both = a.iter().zip(b).filter(|(x, y)| !**x && !**y).count();
    both as f64 / a.len().max(1) as f64
}

/// Positions chosen by DES-KNN: the most accurate `N`, then a greedy pick of
/// `J` that minimizes summed double-fault, seeded with the most accurate.
pub fn desknn_selection(
    pool: &[&Perceptron],
    roc: &RegionOfCompetence,
    pct_accuracy: f64,
    pct_diversity: f64,
) -> Vec<usize> {
    let correct = correctness(pool, roc);
    let acc: Vec<usize> = correct.iter().map(|r| count_correct(r)).collect();
    let mut ranked: Vec<usize> = everyone(pool);
    ranked.sort_by(|&a, &b| acc[b].cmp(&acc[a]).then(a.cmp(&b)));

    let n = ceil_fraction(pct_accuracy, pool.len()).min(pool.len());
    let j = ceil_fraction(pct_diversity, pool.len()).min(n);
    let candidates = &ranked[..n];

    let mut chosen = vec![candidates[0]];
    while chosen.len() < j {
        let next = candidates
            .iter()
            .copied()
            .filter(|c| !chosen.contains(c))
            .map(|c| {
                let cost: f64 = chosen.iter().map(|&s| double_fault(&correct[c], &correct[s])).sum();
                (c, cost)
            })
            // Strict improvement only, so ties keep the more accurate candidate.
            .fold(None::<(usize, f64)>, |best, (c, cost)| match best {
                Some((_, b)) if b <= cost => best,
                _ => Some((c, cost)),
            })
            .expect("candidates remain")
            .0;
        chosen.push(next);
    }
    chosen.sort_unstable();
    chosen
}

pub fn desknn(
    pool: &[&Perceptron],
    roc: &RegionOfCompetence,
    query: &[f64],
    pct_accuracy: f64,
    pct_diversity: f64,
    minority: ClassLabel,
) -> Result<Decision> {
    check_inputs(pool, roc)?;
    let chosen = desknn_selection(pool, roc, pct_accuracy, pct_diversity);
    Ok(plain_vote(pool, &chosen, query, minority))
}

/// KNORA-Union: every classifier votes with weight equal to the number of
/// region members it gets right.
pub fn knora_u(
    pool: &[&Perceptron],
    roc: &RegionOfCompetence,
    query: &[f64],
    minority: ClassLabel,
) -> Result<Decision> {
    check_inputs(pool, roc)?;
    let counts: Vec<usize> = correctness(pool, roc).iter().map(|r| count_correct(r)).collect();
    let voters: Vec<usize> = (0..pool.len()).filter(|&i| counts[i] > 0).collect();
    if voters.is_empty() {
        return Ok(plain_vote(pool, &everyone(pool), query, minority));
    }
    let weights: Vec<f64> = voters.iter().map(|&i| counts[i] as f64).collect();
    Ok(vote(pool, &voters, &weights, query, minority))
}

/// Positions of the classifiers correct on all of the `r` nearest members.
pub fn oracles_at(correct: &[Vec<bool>], r: usize) -> Vec<usize> {
    (0..correct.len())
        .filter(|&i| correct[i][..r].iter().all(|&b| b))
        .collect()
}

/// KNORA-Eliminate selection and the region size at which it was found;
/// size 0 means the whole pool was used.
pub fn knora_e_selection(pool: &[&Perceptron], roc: &RegionOfCompetence) -> (Vec<usize>, usize) {
    let correct = correctness(pool, roc);
    for r in (1..=roc.len()).rev() {
        let sel = oracles_at(&correct, r);
        if !sel.is_empty() {
            return (sel, r);
        }
    }
    (everyone(pool), 0)
}

pub fn knora_e(
    pool: &[&Perceptron],
    roc: &RegionOfCompetence,
    query: &[f64],
    minority: ClassLabel,
) -> Result<Decision> {
    check_inputs(pool, roc)?;
    let (sel, _) = knora_e_selection(pool, roc);
    Ok(plain_vote(pool, &sel, query, minority))
}

/// Uniform dispatch over the eight techniques.
pub fn decide(
    technique: Technique,
    pool: &[&Perceptron],
    roc: &RegionOfCompetence,
    query: &[f64],
    params: &DesParams,
) -> Result<Decision> {
    check_inputs(pool, roc)?;
    let minority = params.minority;
    let dcs = |scores: CompetenceVector| Ok(single(pool, scores.argmax(), query, minority));
    match technique {
        Technique::Ola => dcs(ola(pool, roc)),
        Technique::Lca => dcs(lca(pool, roc, query)),
        Technique::APriori => dcs(a_priori(pool, roc)),
        Technique::APosteriori => dcs(a_posteriori(pool, roc, query)),
        Technique::Mcb => mcb(pool, roc, query, params.mcb_sim_threshold, params.mcb_diff_threshold, minority),
        Technique::DesKnn => desknn(
            pool,
            roc,
            query,
            params.desknn_pct_accuracy,
            params.desknn_pct_diversity,
            minority,
        ),
        Technique::KnoraU => knora_u(pool, roc, query, minority),
        Technique::KnoraE => knora_e(pool, roc, query, minority),
    }
}
