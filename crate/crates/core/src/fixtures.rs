//! Small hand-built problems that exercise the noise-sensitivity and
//! single-class-region failure modes and their repair.
//!
//! Class `circle` (label 0) is the minority. The query at the origin belongs
//! to class `square` (label 1). Sample `N` is a mislabelled `square` sitting
//! among the circles; `G` and `H` are far-away squares that make `square`
//! the majority class so that ENN is allowed to remove `N`.

use crate::dataset::{ClassLabel, Dataset};
use crate::generation::{ClassifierPool, Perceptron};
use crate::region::{knne_region, RegionMember, RegionOfCompetence};

/// Region size for the plain KNN scenarios of the toy problem.
pub const TOY_KNN_K: usize = 4;
/// Per-class region size for the KNNE scenarios of the toy problem.
pub const TOY_KNNE_K: usize = 2;
pub const TOY_ENN_K: usize = 3;

pub const CIRCLE: ClassLabel = ClassLabel::ZERO;
pub const SQUARE: ClassLabel = ClassLabel::ONE;

/// Sample names in row order of [`noisy_validation`].
pub const SAMPLE_NAMES: [&str; 9] = ["A", "B", "C", "D", "N", "E", "F", "G", "H"];

const POINTS: [([f64; 2], ClassLabel); 9] = [
    ([-1.0, 0.6], CIRCLE),
    ([-1.0, -0.6], CIRCLE),
    ([-1.4, -0.2], CIRCLE),
    ([-2.0, 0.5], CIRCLE),
    ([-1.3, -0.9], SQUARE),
    ([2.3, 0.4], SQUARE),
    ([2.3, -0.4], SQUARE),
    ([2.9, 0.5], SQUARE),
    ([2.9, -0.5], SQUARE),
];

pub fn query() -> Vec<f64> {
    vec![0.0, 0.0]
}

pub const QUERY_LABEL: ClassLabel = SQUARE;

/// The validation set including the noisy sample `N`.
pub fn noisy_validation() -> Dataset {
    Dataset::new(
        "toy-noisy",
        POINTS.iter().map(|(p, _)| p.to_vec()).collect(),
        POINTS.iter().map(|(_, l)| *l).collect(),
        vec!["circle".into(), "square".into()],
    )
    .expect("valid fixture")
}

/// The validation set with `N` removed by hand.
pub fn clean_validation() -> Dataset {
    let keep: Vec<usize> = (0..POINTS.len()).filter(|&i| SAMPLE_NAMES[i] != "N").collect();
    let d = noisy_validation().subset(&keep);
    Dataset::with_minority(
        "toy-clean",
        d.features().to_vec(),
        d.labels().to_vec(),
        d.class_names().to_vec(),
        d.minority(),
    )
    .expect("valid fixture")
}

/// Three linear classifiers `c1`, `c2`, `c3` (pool indices 0, 1, 2).
///
/// On the noisy KNN region {A, B, C, N}: c1 is right on all four, c2 on B
/// and C, c3 on A, B and C. Only c2 labels the query correctly.
pub fn pool() -> ClassifierPool {
    ClassifierPool::from_members(
        vec![
            Perceptron::new(vec![-2.0, -1.0], -3.25, 0),
            Perceptron::new(vec![0.15, 1.0], 0.33, 1),
            Perceptron::new(vec![1.0, 0.0], -5.0, 2),
        ],
        0,
    )
    .expect("valid fixture")
}

/// Name of a row of [`noisy_validation`].
pub fn sample_name(index: usize) -> &'static str {
    SAMPLE_NAMES[index]
}

/// The balanced region {A, B, E, F} drawn from the cleaned set.
pub fn balanced_region() -> RegionOfCompetence {
    knne_region(&clean_validation(), &query(), TOY_KNNE_K).expect("both classes present")
}

/// A region with circles {A, B} and squares {C, D, E}.
pub fn frienemy_region() -> RegionOfCompetence {
    let pts: [(&[f64], ClassLabel); 5] = [
        (&[-0.5, 0.5], CIRCLE),
        (&[-0.6, -0.4], CIRCLE),
        (&[0.5, 0.6], SQUARE),
        (&[0.7, 0.0], SQUARE),
        (&[0.4, -0.7], SQUARE),
    ];
    let members = pts
        .iter()
        .enumerate()
        .map(|(i, (x, l))| RegionMember {
            index: i,
            label: *l,
            distance: crate::region::euclidean(x, &[0.0, 0.0]),
            features: x.to_vec(),
        })
        .collect();
    let mut roc = RegionOfCompetence::from_members(vec![0.0, 0.0], members, 5);
    // Keep the A..E order so pair positions read naturally.
    roc.members.sort_by_key(|m| m.index);
    roc
}
