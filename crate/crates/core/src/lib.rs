//! Dynamic ensemble selection with noise filtering, class-balanced regions of
//! competence and frienemy pruning, plus the statistics used to compare
//! configurations across datasets.
//!
//! The phases are independent modules: [`generation`] builds a bagged pool of
//! perceptrons, [`filtering`] edits the validation set, [`region`] defines the
//! region of competence, [`pruning`] drops classifiers that do not cross it,
//! and [`des`] makes the final selection. [`pipeline`] wires them together.

pub mod dataset;
pub mod des;
pub mod error;
pub mod filtering;
pub mod fixtures;
pub mod generation;
pub mod pipeline;
pub mod pruning;
pub mod region;
pub mod seed;
pub mod stats;

pub use dataset::{make_replications, parse_keel, write_keel, ClassLabel, Dataset, MinMaxScaler, ReplicationSplit};
pub use des::{decide, CompetenceVector, Decision, DesParams, Technique};
pub use error::{Error, Result};
pub use filtering::{build_proximity_graph, enn_filter, rng_filter, FilterKind, FilterReport, ProximityGraph};
pub use generation::{generate_pool, ClassifierPool, Perceptron};
pub use pipeline::{
    auc, classify_query, run_experiment, ExperimentOutcome, ExperimentSettings, ResultsDocument, RunResult, Scenario,
    ScenarioConfig,
};
pub use pruning::{dfp_prune, frienemy_pairs, FrienemySet, PrunedPool};
pub use region::{knn_region, knne_region, RegionMember, RegionOfCompetence};
