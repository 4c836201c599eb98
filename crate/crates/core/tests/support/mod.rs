//! Property checks shared by the proptest suite and the acceptance harness.
//! Each check takes concrete inputs; [`SUITES`] pairs it with a strategy.
#![allow(dead_code)]

use std::collections::BTreeSet;

use firedes_core::des::{self, oracles_at};
use firedes_core::filtering::{enn_select, rng_select};
use firedes_core::pipeline::auc;
use firedes_core::pruning::{dfp_prune, frienemy_pairs};
use firedes_core::region::{euclidean, knn_region, knne_region, RegionOfCompetence};
use firedes_core::stats::{friedman, rank_descending, wilcoxon_with, RankTable, WilcoxonMethod};
use firedes_core::{ClassLabel, Dataset, Perceptron};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

/// Runs `check` on `cases` inputs drawn from `strategy` with a fixed seed.
pub fn run<S: Strategy>(cases: u32, strategy: S, check: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, proptest::test_runner::TestRng::deterministic_rng(proptest::test_runner::RngAlgorithm::ChaCha))
        .run(&strategy, check)
        .map_err(|e| e.to_string())
}

/// Points on a coarse grid so duplicate distances actually occur.
pub fn coord() -> impl Strategy<Value = f64> {
    (-20i32..=20).prop_map(|v| v as f64 / 10.0)
}

pub fn labelled_points(min: usize, max: usize, dim: usize) -> impl Strategy<Value = Dataset> {
    prop::collection::vec((prop::collection::vec(coord(), dim), any::<bool>()), min..=max)
        .prop_filter("both classes", |rows| {
            rows.iter().any(|r| r.1) && rows.iter().any(|r| !r.1)
        })
        .prop_map(|rows| {
            let (features, labels): (Vec<_>, Vec<_>) = rows
                .into_iter()
                .map(|(x, l)| (x, ClassLabel(l as u8)))
                .unzip();
            Dataset::new("random", features, labels, vec![]).unwrap()
        })
}

pub fn perceptrons(n: std::ops::RangeInclusive<usize>, dim: usize) -> impl Strategy<Value = Vec<Perceptron>> {
    prop::collection::vec((prop::collection::vec(-2.0f64..2.0, dim), -1.0f64..1.0), n).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(i, (w, b))| Perceptron::new(w, b, i))
            .collect()
    })
}

pub fn dist_matrix(d: &Dataset) -> Vec<Vec<f64>> {
    (0..d.len())
        .map(|i| (0..d.len()).map(|j| euclidean(d.row(i), d.row(j))).collect())
        .collect()
}

/// Edge set of the relative neighborhood graph straight from its definition.
pub fn rng_oracle(d: &Dataset) -> BTreeSet<(usize, usize)> {
    let m = dist_matrix(d);
    let n = d.len();
    let mut edges = BTreeSet::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if (0..n)
                .filter(|&k| k != i && k != j)
                .all(|k| m[i][j] <= m[i][k].max(m[j][k]))
            {
                edges.insert((i, j));
            }
        }
    }
    edges
}

/// k nearest by full sort of (distance, index).
pub fn knn_oracle(d: &Dataset, rows: &[usize], q: &[f64], k: usize) -> Vec<usize> {
    let mut v: Vec<(f64, usize)> = rows.iter().map(|&i| (euclidean(d.row(i), q), i)).collect();
    v.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    v.into_iter().take(k).map(|(_, i)| i).collect()
}

pub fn region_from(d: &Dataset, q: &[f64], k: usize) -> RegionOfCompetence {
    knn_region(d, q, k.min(d.len())).unwrap()
}

pub fn filters_keep_minority_and_return_a_subset(d: &Dataset, use_rng: bool) -> Result<(), TestCaseError> {
    let report = if use_rng { rng_select(d).unwrap() } else { enn_select(d, 3).unwrap() };
    let kept: BTreeSet<usize> = report.kept.iter().copied().collect();
    prop_assert!(kept.iter().all(|&i| i < d.len()));
    prop_assert_eq!(kept.len() + report.removed.len(), d.len());
    for i in 0..d.len() {
        if d.label(i) == d.minority() {
            prop_assert!(kept.contains(&i), "minority sample {} removed", i);
        }
    }
    let out = report.apply(d);
    prop_assert!(out.has_both_classes());
    for (pos, &i) in report.kept.iter().enumerate() {
        prop_assert_eq!(out.row(pos), d.row(i));
        prop_assert_eq!(out.label(pos), d.label(i));
    }
    Ok(())
}

pub fn knne_blocks_match_class_restricted_knn(d: &Dataset, q: &[f64], k: usize) -> Result<(), TestCaseError> {
    let roc = knne_region(d, q, k).unwrap();
    prop_assert!(roc.has_both_classes());
    for label in [ClassLabel::ZERO, ClassLabel::ONE] {
        let rows: Vec<usize> = (0..d.len()).filter(|&i| d.label(i) == label).collect();
        let block: Vec<usize> = roc.members.iter().filter(|m| m.label == label).map(|m| m.index).collect();
        prop_assert_eq!(&block, &knn_oracle(d, &rows, q, k));
        prop_assert_eq!(roc.shortfall[label.index()], k.saturating_sub(rows.len()));
    }
    for w in roc.members.windows(2) {
        prop_assert!(w[0].distance <= w[1].distance);
    }
    Ok(())
}

pub fn kne_selection_grows_as_the_region_shrinks(d: &Dataset, pool: &[Perceptron], q: &[f64]) -> Result<(), TestCaseError> {
    let roc = region_from(d, q, 7);
    let refs: Vec<&Perceptron> = pool.iter().collect();
    let correct = des::correctness(&refs, &roc);
    for r in 1..roc.len() {
        let small: BTreeSet<_> = oracles_at(&correct, r).into_iter().collect();
        let large: BTreeSet<_> = oracles_at(&correct, r + 1).into_iter().collect();
        prop_assert!(large.is_subset(&small));
    }
    // The selection on a truncated region is a superset of the full one.
    let (full, _) = des::knora_e_selection(&refs, &roc);
    let (trunc, _) = des::knora_e_selection(&refs, &roc.truncated(roc.len() - 1));
    let full: BTreeSet<_> = full.into_iter().collect();
    let trunc: BTreeSet<_> = trunc.into_iter().collect();
    prop_assert!(full.is_subset(&trunc));
    Ok(())
}

pub fn dfp_matches_set_comprehension(d: &Dataset, pool: &[Perceptron], q: &[f64], k: usize, balanced: bool) -> Result<(), TestCaseError> {
    let roc = if balanced { knne_region(d, q, k).unwrap() } else { region_from(d, q, k) };
    let refs: Vec<&Perceptron> = pool.iter().collect();
    let pruned = dfp_prune(&roc, &refs);
    prop_assert!(!pruned.selected.is_empty());

    let m = &roc.members;
    let ok = |c: &Perceptron, j: usize| c.predict(&m[j].features) == m[j].label;
    let oracle: Vec<usize> = (0..refs.len())
        .filter(|&i| {
            (0..m.len()).any(|a| (0..m.len()).any(|b| m[a].label != m[b].label && ok(refs[i], a) && ok(refs[i], b)))
        })
        .collect();
    if oracle.is_empty() {
        prop_assert!(pruned.fallback_used);
        prop_assert_eq!(pruned.selected, (0..refs.len()).collect::<Vec<_>>());
    } else {
        prop_assert!(!pruned.fallback_used);
        prop_assert_eq!(pruned.selected, oracle);
    }
    let c = roc.class_counts();
    prop_assert_eq!(frienemy_pairs(&roc).len(), c[0] * c[1]);
    if balanced {
        prop_assert!(!frienemy_pairs(&roc).is_empty());
    }
    Ok(())
}

pub fn auc_matches_pair_counting(raw: &[(i32, bool)]) -> Result<(), TestCaseError> {
    prop_assume!(raw.iter().any(|r| r.1) && raw.iter().any(|r| !r.1));
    let scores: Vec<f64> = raw.iter().map(|r| r.0 as f64 / 19.0).collect();
    let labels: Vec<ClassLabel> = raw.iter().map(|r| ClassLabel(r.1 as u8)).collect();
    let pos = ClassLabel::ONE;
    let mut num = 0.0;
    let mut pairs = 0.0;
    for i in 0..scores.len() {
        for j in 0..scores.len() {
            if labels[i] == pos && labels[j] != pos {
                pairs += 1.0;
                num += if scores[i] > scores[j] { 1.0 } else if scores[i] == scores[j] { 0.5 } else { 0.0 };
            }
        }
    }
    let got = auc(&scores, &labels, pos).unwrap();
    prop_assert!((got - num / pairs).abs() <= 1e-12);
    // Strictly increasing transforms leave it unchanged.
    let warped: Vec<f64> = scores.iter().map(|s| (3.0 * s).exp() - 7.0).collect();
    prop_assert!((auc(&warped, &labels, pos).unwrap() - got).abs() <= 1e-12);
    Ok(())
}

pub fn wilcoxon_normal_tracks_exact_at_n12(a: &[f64], b: &[f64]) -> Result<(), TestCaseError> {
    let exact = wilcoxon_with(a, b, 0.1, WilcoxonMethod::Exact).unwrap();
    let normal = wilcoxon_with(a, b, 0.1, WilcoxonMethod::Normal).unwrap();
    prop_assert!((exact.p_value - normal.p_value).abs() <= 0.02, "exact {} normal {}", exact.p_value, normal.p_value);
    let swapped = wilcoxon_with(b, a, 0.1, WilcoxonMethod::Exact).unwrap();
    prop_assert!((swapped.p_value - exact.p_value).abs() <= 1e-12);
    Ok(())
}

pub fn friedman_matches_direct_formula(rows: &[Vec<f64>]) -> Result<(), TestCaseError> {
    let (n, k) = (5.0, 4.0);
    let t = RankTable::new(
        (0..4).map(|i| format!("m{i}")).collect(),
        (0..5).map(|i| format!("b{i}")).collect(),
        rows.to_vec(),
    ).unwrap();
    let r = friedman(&t, 0.05).unwrap();
    // Rank sums form, valid without ties.
    let sums: Vec<f64> = (0..4).map(|m| rows.iter().map(|row| rank_descending(row)[m]).sum()).collect();
    let direct = 12.0 / (n * k * (k + 1.0)) * sums.iter().map(|s| s * s).sum::<f64>() - 3.0 * n * (k + 1.0);
    prop_assert!((r.statistic - direct).abs() <= 1e-9);
    Ok(())
}

/// Runs a suite for the given number of cases.
pub type Suite = fn(u32) -> Result<(), String>;

/// The checks above paired with their input strategies.
pub const SUITES: &[(&str, Suite)] = &[
    ("filters_keep_minority_and_return_a_subset", |cases| run(cases, (labelled_points(5, 30, 2), any::<bool>()), |(d, use_rng)| filters_keep_minority_and_return_a_subset(&d, use_rng))),
    ("knne_blocks_match_class_restricted_knn", |cases| run(cases, (labelled_points(2, 40, 2), prop::collection::vec(coord(), 2), 1usize..9), |(d, q, k)| knne_blocks_match_class_restricted_knn(&d, &q, k))),
    ("kne_selection_grows_as_the_region_shrinks", |cases| run(cases, (labelled_points(7, 25, 2), perceptrons(1..=8, 2), prop::collection::vec(coord(), 2)), |(d, pool, q)| kne_selection_grows_as_the_region_shrinks(&d, &pool, &q))),
    ("dfp_matches_set_comprehension", |cases| run(cases, (labelled_points(4, 25, 2), perceptrons(1..=8, 2), prop::collection::vec(coord(), 2), 2usize..8, any::<bool>()), |(d, pool, q, k, balanced)| dfp_matches_set_comprehension(&d, &pool, &q, k, balanced))),
    ("auc_matches_pair_counting", |cases| run(cases, prop::collection::vec(((0i32..20), any::<bool>()), 2..60), |raw| auc_matches_pair_counting(&raw))),
    ("wilcoxon_normal_tracks_exact_at_n12", |cases| run(cases, (prop::collection::vec(0.0f64..1.0, 12), prop::collection::vec(0.0f64..1.0, 12)), |(a, b)| wilcoxon_normal_tracks_exact_at_n12(&a, &b))),
    ("friedman_matches_direct_formula", |cases| run(cases, prop::collection::vec(prop::collection::vec(0.0f64..1.0, 4), 5), |rows| friedman_matches_direct_formula(&rows))),
];
