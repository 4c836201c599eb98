//! Randomized checks against independent brute-force oracles.

use std::collections::BTreeSet;

use firedes_core::des::{self, DesParams, Technique};
use firedes_core::filtering::{build_proximity_graph, enn_select, rng_select};
use firedes_core::pruning::dfp_prune;
use firedes_core::region::{knn_region, knne_region, RegionOfCompetence};
use firedes_core::stats::{friedman, rank_descending, RankTable};
use firedes_core::{ClassLabel, Perceptron};
use proptest::prelude::*;

mod support;
use support::*;

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 256,
        ..ProptestConfig::default()
    }
}

macro_rules! shared {
    ($($name:ident),* $(,)?) => {$(
        #[test]
        fn $name() {
            let (_, suite) = SUITES.iter().find(|(n, _)| *n == stringify!($name)).expect("registered suite");
            suite(config().cases).unwrap();
        }
    )*};
}

shared!(
    filters_keep_minority_and_return_a_subset,
    knne_blocks_match_class_restricted_knn,
    kne_selection_grows_as_the_region_shrinks,
    dfp_matches_set_comprehension,
    auc_matches_pair_counting,
    wilcoxon_normal_tracks_exact_at_n12,
    friedman_matches_direct_formula,
);

proptest! {
    #![proptest_config(config())]

    #[test]
    fn proximity_graph_matches_definition(d in labelled_points(2, 14, 2)) {
        let g = build_proximity_graph(&d).unwrap();
        let got: BTreeSet<(usize, usize)> = g.edges().into_iter().collect();
        prop_assert_eq!(&got, &rng_oracle(&d));
        for (i, j) in got {
            prop_assert!(g.has_edge(j, i));
        }
    }

    #[test]
    fn knn_region_matches_sorted_distances(d in labelled_points(2, 40, 3), q in prop::collection::vec(coord(), 3), k in 1usize..10) {
        let k = k.min(d.len());
        let rows: Vec<usize> = (0..d.len()).collect();
        let roc = knn_region(&d, &q, k).unwrap();
        prop_assert_eq!(roc.indices(), knn_oracle(&d, &rows, &q, k));
        if k < d.len() {
            let bigger = knn_region(&d, &q, k + 1).unwrap();
            prop_assert_eq!(&bigger.indices()[..k], &roc.indices()[..]);
        }
    }

    #[test]
    fn canonical_order_makes_regions_and_filters_order_free(d in labelled_points(4, 20, 2), q in prop::collection::vec(coord(), 2), k in 1usize..6, seed in any::<u64>(), use_rng in any::<bool>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut perm: Vec<usize> = (0..d.len()).collect();
        perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        // Grid points and a grid query, so distance ties are common.
        let (a, _) = d.canonical();
        let (b, _) = d.subset(&perm).canonical();
        prop_assert_eq!(a.features(), b.features());
        prop_assert_eq!(a.labels(), b.labels());
        let key = |roc: RegionOfCompetence| -> BTreeSet<Vec<u64>> {
            roc.members.iter().map(|m| m.features.iter().map(|v| v.to_bits()).chain([m.label.0 as u64]).collect()).collect()
        };
        prop_assert_eq!(key(knne_region(&a, &q, k).unwrap()), key(knne_region(&b, &q, k).unwrap()));
        let fa = if use_rng { rng_select(&a).unwrap() } else { enn_select(&a, 3).unwrap() };
        let fb = if use_rng { rng_select(&b).unwrap() } else { enn_select(&b, 3).unwrap() };
        prop_assert_eq!(fa.apply(&a), fb.apply(&b));
    }

    #[test]
    fn dfp_is_monotone_in_the_pool(d in labelled_points(4, 20, 2), pool in perceptrons(2..=8, 2), q in prop::collection::vec(coord(), 2)) {
        let roc = knne_region(&d, &q, 3).unwrap();
        let all: Vec<&Perceptron> = pool.iter().collect();
        let fewer = &all[..all.len() - 1];
        let a = dfp_prune(&roc, fewer);
        let b = dfp_prune(&roc, &all);
        if !a.fallback_used {
            let bs: BTreeSet<_> = b.selected.iter().collect();
            prop_assert!(a.selected.iter().all(|i| bs.contains(i)));
        }
    }

    #[test]
    fn friedman_tie_correction_matches_conover_form(rows in prop::collection::vec(prop::collection::vec(0u8..3, 4), 5)) {
        prop_assume!(rows.iter().any(|r| r.iter().any(|&v| v != r[0])));
        let scores: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect();
        let t = RankTable::new(
            (0..4).map(|i| format!("m{i}")).collect(),
            (0..5).map(|i| format!("b{i}")).collect(),
            scores.clone(),
        ).unwrap();
        let r = friedman(&t, 0.05).unwrap();
        let (n, k) = (5.0, 4.0);
        let ranks: Vec<Vec<f64>> = scores.iter().map(|s| rank_descending(s)).collect();
        let sums: Vec<f64> = (0..4).map(|m| ranks.iter().map(|row| row[m]).sum()).collect();
        let a: f64 = ranks.iter().flatten().map(|x| x * x).sum();
        let c = n * k * (k + 1.0) * (k + 1.0) / 4.0;
        let conover = (k - 1.0) * sums.iter().map(|s| (s - n * (k + 1.0) / 2.0).powi(2)).sum::<f64>() / (a - c);
        prop_assert!((r.statistic - conover).abs() <= 1e-9, "{} vs {}", r.statistic, conover);
    }

    #[test]
    fn rank_rows_sum_to_triangular(row in prop::collection::vec(0u8..4, 2..10)) {
        let scores: Vec<f64> = row.iter().map(|&v| v as f64).collect();
        let k = scores.len() as f64;
        let s: f64 = rank_descending(&scores).iter().sum();
        prop_assert_eq!(s, k * (k + 1.0) / 2.0);
    }

    #[test]
    fn proba_is_symmetric_and_tracks_the_margin(w in prop::collection::vec(-3.0f64..3.0, 3), b in -2.0f64..2.0, x in prop::collection::vec(-2.0f64..2.0, 3)) {
        let c = Perceptron::new(w.clone(), b, 0);
        let neg = Perceptron::new(w.iter().map(|v| -v).collect(), -b, 0);
        prop_assert!((c.proba(&x) + neg.proba(&x) - 1.0).abs() <= 1e-12);
        prop_assert_eq!(c.predict(&x) == ClassLabel::ONE, c.margin(&x) >= 0.0);
    }

    #[test]
    fn decisions_are_scale_invariant(d in labelled_points(8, 25, 2), pool in perceptrons(1..=5, 2), q in prop::collection::vec(coord(), 2), scale in 0.1f64..10.0) {
        let roc = knne_region(&d, &q, 3).unwrap();
        let scaled: Vec<Perceptron> = pool
            .iter()
            .map(|c| Perceptron::new(c.weights.iter().map(|v| v * scale).collect(), c.bias * scale, c.index))
            .collect();
        let a: Vec<&Perceptron> = pool.iter().collect();
        let b: Vec<&Perceptron> = scaled.iter().collect();
        let params = DesParams::default().with_minority(d.minority());
        for t in Technique::ALL {
            let da = des::decide(t, &a, &roc, &q, &params).unwrap();
            let db = des::decide(t, &b, &roc, &q, &params).unwrap();
            prop_assert_eq!(da.label, db.label, "{}", t);
        }
    }

    #[test]
    fn techniques_match_formula_oracles(d in labelled_points(6, 20, 2), pool in perceptrons(1..=5, 2), q in prop::collection::vec(coord(), 2), k in 2usize..6) {
        let roc = region_from(&d, &q, k.min(6));
        let refs: Vec<&Perceptron> = pool.iter().collect();
        let minority = d.minority();
        let params = DesParams::default().with_minority(minority);
        let m = &roc.members;
        let right = |c: &Perceptron, j: usize| c.predict(&m[j].features) == m[j].label;
        let argmax = |s: &[f64]| {
            let mut best = 0;
            for i in 1..s.len() {
                if s[i] > s[best] { best = i; }
            }
            best
        };
        let majority = |voters: &[(usize, f64)]| {
            let mut support = [0.0, 0.0];
            for &(i, w) in voters {
                support[refs[i].predict(&q).index()] += w;
            }
            if support[minority.index()] >= support[minority.other().index()] { minority } else { minority.other() }
        };

        // OLA
        let ola: Vec<f64> = refs.iter().map(|c| (0..m.len()).filter(|&j| right(c, j)).count() as f64 / m.len() as f64).collect();
        let got = des::decide(Technique::Ola, &refs, &roc, &q, &params).unwrap();
        prop_assert_eq!(got.selected_indices, vec![refs[argmax(&ola)].index]);

        // LCA
        let lca: Vec<f64> = refs.iter().map(|c| {
            let w = c.predict(&q);
            let of: Vec<usize> = (0..m.len()).filter(|&j| m[j].label == w).collect();
            if of.is_empty() { 0.0 } else { of.iter().filter(|&&j| right(c, j)).count() as f64 / of.len() as f64 }
        }).collect();
        let got = des::decide(Technique::Lca, &refs, &roc, &q, &params).unwrap();
        prop_assert_eq!(got.selected_indices, vec![refs[argmax(&lca)].index]);

        // A priori / a posteriori
        let w = |j: usize| 1.0 / m[j].distance.max(1e-12);
        let apri: Vec<f64> = refs.iter().map(|c| {
            (0..m.len()).map(|j| c.proba_of(&m[j].features, m[j].label) * w(j)).sum::<f64>() / (0..m.len()).map(w).sum::<f64>()
        }).collect();
        let scores = des::a_priori(&refs, &roc).0;
        for (x, y) in scores.iter().zip(&apri) {
            prop_assert!((x - y).abs() <= 1e-9 * (1.0 + y.abs()));
        }
        let apos: Vec<f64> = refs.iter().map(|c| {
            let om = c.predict(&q);
            let num: f64 = (0..m.len()).filter(|&j| m[j].label == om).map(|j| c.proba_of(&m[j].features, om) * w(j)).sum();
            let den: f64 = (0..m.len()).map(|j| c.proba_of(&m[j].features, om) * w(j)).sum();
            if den < 1e-12 { 0.0 } else { num / den }
        }).collect();
        let scores = des::a_posteriori(&refs, &roc, &q).0;
        for (x, y) in scores.iter().zip(&apos) {
            prop_assert!((x - y).abs() <= 1e-9);
        }

        // KNORA-U
        let counts: Vec<usize> = refs.iter().map(|c| (0..m.len()).filter(|&j| right(c, j)).count()).collect();
        let mut voters: Vec<(usize, f64)> = (0..refs.len()).filter(|&i| counts[i] > 0).map(|i| (i, counts[i] as f64)).collect();
        if voters.is_empty() {
            voters = (0..refs.len()).map(|i| (i, 1.0)).collect();
        }
        let got = des::decide(Technique::KnoraU, &refs, &roc, &q, &params).unwrap();
        prop_assert_eq!(got.label, majority(&voters));

        // KNORA-E
        let mut sel: Vec<usize> = Vec::new();
        for r in (1..=m.len()).rev() {
            sel = (0..refs.len()).filter(|&i| (0..r).all(|j| right(refs[i], j))).collect();
            if !sel.is_empty() { break; }
        }
        if sel.is_empty() {
            sel = (0..refs.len()).collect();
        }
        let got = des::decide(Technique::KnoraE, &refs, &roc, &q, &params).unwrap();
        prop_assert_eq!(&got.selected_indices, &sel.iter().map(|&i| refs[i].index).collect::<Vec<_>>());
        prop_assert_eq!(got.label, majority(&sel.iter().map(|&i| (i, 1.0)).collect::<Vec<_>>()));

        // Every decision keeps positive_score on the same side as its label.
        for t in Technique::ALL {
            let dd = des::decide(t, &refs, &roc, &q, &params).unwrap();
            prop_assert!((0.0..=1.0).contains(&dd.positive_score));
            prop_assert!(!dd.selected_indices.is_empty());
            if dd.positive_score != 0.5 {
                prop_assert_eq!(dd.positive_score > 0.5, dd.label == minority, "{}", t);
            }
        }
    }
}
