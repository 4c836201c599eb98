//! The four phases composed per query, the eight ablation scenarios, and the
//! replicated experiment driver.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{make_replications, ClassLabel, Dataset, ReplicationSplit};
use crate::des::{decide, Decision, DesParams, Technique};
use crate::error::{contract, Error, Result};
use crate::filtering::{filter_select, FilterKind, DEFAULT_ENN_K};
use crate::generation::{generate_pool, ClassifierPool, Perceptron};
use crate::pruning::dfp_prune;
use crate::region::{knn_region, knne_region, DEFAULT_K};
use crate::seed::{derive_seed, stable_hash};

pub const DEFAULT_POOL_SIZE: usize = 100;
pub const RESULTS_SCHEMA: u32 = 1;

const POOL_SALT: u64 = 0x706f_6f6c;

/// The eight on/off combinations of KNNE, ENN and DFP.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scenario {
    I,
    II,
    III,
    IV,
    V,
    VI,
    VII,
    VIII,
}

impl Scenario {
    pub const ALL: [Scenario; 8] = [
        Scenario::I,
        Scenario::II,
        Scenario::III,
        Scenario::IV,
        Scenario::V,
        Scenario::VI,
        Scenario::VII,
        Scenario::VIII,
    ];

    /// `(use_knne, use_enn, use_dfp)`.
    pub fn switches(self) -> (bool, bool, bool) {
        match self {
            Scenario::I => (false, false, false),
            Scenario::II => (true, false, false),
            Scenario::III => (false, true, false),
            Scenario::IV => (false, false, true),
            Scenario::V => (true, true, false),
            Scenario::VI => (true, false, true),
            Scenario::VII => (false, true, true),
            Scenario::VIII => (true, true, true),
        }
    }

    pub fn from_switches(use_knne: bool, use_enn: bool, use_dfp: bool) -> Scenario {
        *Scenario::ALL
            .iter()
            .find(|s| s.switches() == (use_knne, use_enn, use_dfp))
            .expect("all eight combinations are covered")
    }

    pub fn name(self) -> &'static str {
        match self {
            Scenario::I => "I",
            Scenario::II => "II",
            Scenario::III => "III",
            Scenario::IV => "IV",
            Scenario::V => "V",
            Scenario::VI => "VI",
            Scenario::VII => "VII",
            Scenario::VIII => "VIII",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let up = s.trim().to_ascii_uppercase();
        Scenario::ALL
            .iter()
            .copied()
            .find(|sc| sc.name() == up)
            .or_else(|| match up.parse::<usize>() {
                Ok(n @ 1..=8) => Some(Scenario::ALL[n - 1]),
                _ => None,
            })
            .ok_or_else(|| contract(format!("unknown scenario `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub use_knne: bool,
    pub use_enn: bool,
    pub use_dfp: bool,
    pub technique: Technique,
    pub k: usize,
    pub filter_kind: FilterKind,
    pub enn_k: usize,
    pub pool_size: usize,
    pub seed: u64,
    pub params: DesParams,
}

impl ScenarioConfig {
    pub fn new(scenario: Scenario, technique: Technique) -> Self {
        let (use_knne, use_enn, use_dfp) = scenario.switches();
        Self {
            use_knne,
            use_enn,
            use_dfp,
            technique,
            k: DEFAULT_K,
            filter_kind: FilterKind::Enn,
            enn_k: DEFAULT_ENN_K,
            pool_size: DEFAULT_POOL_SIZE,
            seed: 0,
            params: DesParams::default(),
        }
    }

    pub fn scenario(&self) -> Scenario {
        Scenario::from_switches(self.use_knne, self.use_enn, self.use_dfp)
    }
}

/// Applies the configured filter to the validation set, or returns it as is.
pub fn prepare_dsel(dsel: &Dataset, cfg: &ScenarioConfig) -> Result<Dataset> {
    if cfg.use_enn {
        Ok(filter_select(cfg.filter_kind, dsel, cfg.enn_k)?.apply(dsel))
    } else {
        Ok(dsel.clone())
    }
}

/// Region definition, optional pruning, then dynamic selection for one query.
/// `dsel` must already be prepared for `cfg` (see [`prepare_dsel`]).
pub fn classify_query(query: &[f64], pool: &[&Perceptron], dsel: &Dataset, cfg: &ScenarioConfig) -> Result<Decision> {
    let roc = if cfg.use_knne {
        knne_region(dsel, query, cfg.k)?
    } else {
        knn_region(dsel, query, cfg.k)?
    };
    let params = cfg.params.with_minority(dsel.minority());
    if cfg.use_dfp {
        let pruned = dfp_prune(&roc, pool);
        let sub: Vec<&Perceptron> = pruned.selected.iter().map(|&i| pool[i]).collect();
        decide(cfg.technique, &sub, &roc, query, &params)
    } else {
        decide(cfg.technique, pool, &roc, query, &params)
    }
}

/// Mann-Whitney AUC: the probability that a random positive outscores a
/// random negative, ties counting one half.
pub fn auc(scores: &[f64], labels: &[ClassLabel], positive: ClassLabel) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(contract("scores and labels differ in length"));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(contract("scores contain NaN"));
    }
    let n_pos = labels.iter().filter(|&&l| l == positive).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::UndefinedMetric("AUC needs both classes present".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // Midranks over tie groups; the positive rank sum gives U.
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let midrank = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            if labels[o] == positive {
                rank_sum += midrank;
            }
        }
        i = j + 1;
    }
    let (p, n) = (n_pos as f64, n_neg as f64);
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub dataset: String,
    pub scenario: Scenario,
    pub technique: Technique,
    pub replication_id: usize,
    pub auc: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decisions: Option<Vec<Decision>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetFailure {
    pub dataset: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsDocument {
    pub schema: u32,
    pub results: Vec<RunResult>,
}

impl ResultsDocument {
    pub fn new(mut results: Vec<RunResult>) -> Self {
        sort_results(&mut results);
        Self {
            schema: RESULTS_SCHEMA,
            results,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ResultsDocument = serde_json::from_str(text)?;
        if doc.schema != RESULTS_SCHEMA {
            return Err(Error::Unsupported(format!("results schema {}", doc.schema)));
        }
        Ok(doc)
    }
}

pub fn sort_results(results: &mut [RunResult]) {
    results.sort_by(|a, b| {
        (&a.dataset, a.scenario, a.technique, a.replication_id).cmp(&(&b.dataset, b.scenario, b.technique, b.replication_id))
    });
}

/// Settings shared by every scenario of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSettings {
    pub k: usize,
    pub filter_kind: FilterKind,
    pub enn_k: usize,
    pub pool_size: usize,
    pub seed: u64,
    pub params: DesParams,
    /// Keep per-query decisions in each result.
    pub record_decisions: bool,
}

impl Default for ExperimentSettings {
    fn default() -> Self {
        Self {
            k: DEFAULT_K,
            filter_kind: FilterKind::Enn,
            enn_k: DEFAULT_ENN_K,
            pool_size: DEFAULT_POOL_SIZE,
            seed: 0,
            params: DesParams::default(),
            record_decisions: false,
        }
    }
}

impl ExperimentSettings {
    pub fn scenario_config(&self, scenario: Scenario, technique: Technique) -> ScenarioConfig {
        ScenarioConfig {
            k: self.k,
            filter_kind: self.filter_kind,
            enn_k: self.enn_k,
            pool_size: self.pool_size,
            seed: self.seed,
            params: self.params,
            ..ScenarioConfig::new(scenario, technique)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentOutcome {
    pub results: Vec<RunResult>,
    pub failures: Vec<DatasetFailure>,
}

pub fn dataset_seed(master: u64, name: &str) -> u64 {
    derive_seed(master, stable_hash(name))
}

pub fn pool_seed(dataset_seed: u64, replication_id: usize) -> u64 {
    derive_seed(dataset_seed ^ POOL_SALT, replication_id as u64)
}

/// All scenario and technique results for one replication. The pool and the
/// filtered validation set are built once and shared by every scenario.
pub fn run_replication(
    split: &ReplicationSplit,
    dataset_name: &str,
    scenarios: &[Scenario],
    techniques: &[Technique],
    settings: &ExperimentSettings,
) -> Result<Vec<RunResult>> {
    let pool = generate_pool(&split.train, settings.pool_size, pool_seed(split.seed, split.replication_id))?;
    let members = pool.refs();
    let positive = split.validation.minority();
    let filtered = if scenarios.iter().any(|s| s.switches().1) {
        Some(filter_select(settings.filter_kind, &split.validation, settings.enn_k)?.apply(&split.validation))
    } else {
        None
    };
    let test_labels = split.test.labels();

    let mut out = Vec::with_capacity(scenarios.len() * techniques.len());
    for &scenario in scenarios {
        let dsel = if scenario.switches().1 {
            filtered.as_ref().expect("filtered when needed")
        } else {
            &split.validation
        };
        for &technique in techniques {
            let cfg = settings.scenario_config(scenario, technique);
            let decisions = (0..split.test.len())
                .map(|i| classify_query(split.test.row(i), &members, dsel, &cfg))
                .collect::<Result<Vec<_>>>()?;
            let scores: Vec<f64> = decisions.iter().map(|d| d.positive_score).collect();
            out.push(RunResult {
                dataset: dataset_name.to_string(),
                scenario,
                technique,
                replication_id: split.replication_id,
                auc: auc(&scores, test_labels, positive)?,
                decisions: settings.record_decisions.then_some(decisions),
            });
        }
    }
    Ok(out)
}

/// Runs every (dataset, replication, scenario, technique) combination.
/// Datasets that fail anywhere are reported and contribute no results.
/// Scaling is fitted on each replication's training part.
pub fn run_experiment(
    datasets: &[Dataset],
    scenarios: &[Scenario],
    techniques: &[Technique],
    settings: &ExperimentSettings,
) -> ExperimentOutcome {
    let mut failures = Vec::new();
    let mut units = Vec::new();
    for (d, data) in datasets.iter().enumerate() {
        match prepare_splits(data, settings.seed) {
            Ok(splits) => units.extend(splits.into_iter().map(|s| (d, s))),
            Err(e) => failures.push(DatasetFailure {
                dataset: data.name().to_string(),
                error: e.to_string(),
            }),
        }
    }

    let outcomes: Vec<(usize, Result<Vec<RunResult>>)> = units
        .par_iter()
        .map(|(d, split)| {
            (
                *d,
                run_replication(split, datasets[*d].name(), scenarios, techniques, settings),
            )
        })
        .collect();

    let mut per_dataset: BTreeMap<usize, Result<Vec<RunResult>>> = BTreeMap::new();
    for (d, r) in outcomes {
        let entry = per_dataset.entry(d).or_insert_with(|| Ok(Vec::new()));
        match (entry, r) {
            (Ok(acc), Ok(rs)) => acc.extend(rs),
            (entry @ Ok(_), Err(e)) => *entry = Err(e),
            (Err(_), _) => {}
        }
    }

    let mut results = Vec::new();
    for (d, r) in per_dataset {
        match r {
            Ok(rs) => results.extend(rs),
            Err(e) => failures.push(DatasetFailure {
                dataset: datasets[d].name().to_string(),
                error: e.to_string(),
            }),
        }
    }
    sort_results(&mut results);
    failures.sort_by(|a, b| a.dataset.cmp(&b.dataset));
    ExperimentOutcome { results, failures }
}

/// Stratified replications with min-max scaling fitted on each training part
/// and the validation part in canonical row order.
pub fn prepare_splits(data: &Dataset, master_seed: u64) -> Result<Vec<ReplicationSplit>> {
    let mut splits = make_replications(data, dataset_seed(master_seed, data.name()))?;
    for s in &mut splits {
        let (train, mut rest) = crate::dataset::minmax_fit_apply(&s.train, &[s.validation.clone(), s.test.clone()])?;
        s.test = rest.pop().expect("two sets");
        // Regions and filters break distance ties by row index; a canonical
        // row order makes that independent of how the fold was assembled.
        let (validation, order) = rest.pop().expect("two sets").canonical();
        s.validation_indices = order.iter().map(|&i| s.validation_indices[i]).collect();
        s.validation = validation;
        s.train = train;
    }
    Ok(splits)
}

/// Mean and sample standard deviation of AUC per (dataset, scenario, technique).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub dataset: String,
    pub scenario: Scenario,
    pub technique: Technique,
    pub n: usize,
    pub mean: f64,
    pub std: f64,
}

pub fn summarize(results: &[RunResult]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(String, Scenario, Technique), Vec<f64>> = BTreeMap::new();
    for r in results {
        groups
            .entry((r.dataset.clone(), r.scenario, r.technique))
            .or_default()
            .push(r.auc);
    }
    groups
        .into_iter()
        .map(|((dataset, scenario, technique), v)| {
            let n = v.len();
            let mean = v.iter().sum::<f64>() / n as f64;
            let std = if n > 1 {
                (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
            } else {
                0.0
            };
            SummaryRow {
                dataset,
                scenario,
                technique,
                n,
                mean,
                std,
            }
        })
        .collect()
}

/// Mean AUC per dataset for one (scenario, technique), keyed by dataset.
pub fn dataset_means(results: &[RunResult], scenario: Scenario, technique: Technique) -> BTreeMap<String, f64> {
    summarize(results)
        .into_iter()
        .filter(|r| r.scenario == scenario && r.technique == technique)
        .map(|r| (r.dataset, r.mean))
        .collect()
}

/// Convenience wrapper over a pool owned by a [`ClassifierPool`].
pub fn classify_with_pool(query: &[f64], pool: &ClassifierPool, dsel: &Dataset, cfg: &ScenarioConfig) -> Result<Decision> {
    classify_query(query, &pool.refs(), dsel, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_table() {
        assert_eq!(Scenario::VIII.switches(), (true, true, true));
        assert_eq!(Scenario::IV.switches(), (false, false, true));
        assert_eq!(Scenario::I.switches(), (false, false, false));
        let mut seen: Vec<_> = Scenario::ALL.iter().map(|s| s.switches()).collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 8);
        for s in Scenario::ALL {
            let (a, b, c) = s.switches();
            assert_eq!(Scenario::from_switches(a, b, c), s);
            assert_eq!(s.name().parse::<Scenario>().unwrap(), s);
        }
        assert_eq!("viii".parse::<Scenario>().unwrap(), Scenario::VIII);
        assert_eq!("4".parse::<Scenario>().unwrap(), Scenario::IV);
        assert!("IX".parse::<Scenario>().is_err());
    }

    #[test]
    fn auc_examples() {
        let pos = ClassLabel::ONE;
        let l = |v: &[u8]| v.iter().map(|&x| ClassLabel(x)).collect::<Vec<_>>();
        assert_eq!(auc(&[0.9, 0.4, 0.6, 0.2], &l(&[1, 1, 0, 0]), pos).unwrap(), 0.75);
        assert_eq!(auc(&[0.9, 0.8, 0.1, 0.2], &l(&[1, 1, 0, 0]), pos).unwrap(), 1.0);
        assert_eq!(auc(&[0.5; 4], &l(&[1, 0, 1, 0]), pos).unwrap(), 0.5);
        assert!(matches!(
            auc(&[0.5, 0.6], &l(&[1, 1]), pos),
            Err(Error::UndefinedMetric(_))
        ));
    }

    #[test]
    fn results_sort_canonically() {
        let r = |d: &str, s, rep| RunResult {
            dataset: d.into(),
            scenario: s,
            technique: Technique::KnoraE,
            replication_id: rep,
            auc: 0.5,
            decisions: None,
        };
        let doc = ResultsDocument::new(vec![r("b", Scenario::I, 0), r("a", Scenario::VIII, 1), r("a", Scenario::I, 2)]);
        let keys: Vec<_> = doc.results.iter().map(|x| (x.dataset.as_str(), x.scenario)).collect();
        assert_eq!(keys, vec![("a", Scenario::I), ("a", Scenario::VIII), ("b", Scenario::I)]);
        let back = ResultsDocument::from_json(&doc.to_json().unwrap()).unwrap();
        assert_eq!(back, doc);
    }

    #[test]
    fn summary_statistics() {
        let mk = |auc| RunResult {
            dataset: "d".into(),
            scenario: Scenario::I,
            technique: Technique::Ola,
            replication_id: 0,
            auc,
            decisions: None,
        };
        let s = summarize(&[mk(0.5), mk(0.7)]);
        assert_eq!(s.len(), 1);
        assert!((s[0].mean - 0.6).abs() < 1e-12);
        assert!((s[0].std - 0.02f64.sqrt()).abs() < 1e-12);
    }
}
