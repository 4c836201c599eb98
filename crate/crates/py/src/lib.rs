//! Python bindings. Labels cross the boundary as 0/1 integers and feature
//! rows as lists of floats; every core error becomes `ValueError`.

use firedes_core as core;
use firedes_core::filtering::filter_select;
use firedes_core::pipeline::{prepare_dsel, ExperimentSettings, Scenario, ScenarioConfig};
use firedes_core::stats;
use firedes_core::{ClassLabel, FilterKind, Technique};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn label(v: u32) -> PyResult<ClassLabel> {
    match v {
        0 | 1 => Ok(ClassLabel(v as u8)),
        _ => Err(err(format!("labels must be 0 or 1, got {v}"))),
    }
}

fn parse<T: std::str::FromStr>(s: &str) -> PyResult<T>
where
    T::Err: std::fmt::Display,
{
    s.parse::<T>().map_err(err)
}

/// Two-class dataset with a designated minority class.
#[pyclass(name = "Dataset", module = "firedes", frozen)]
pub struct PyDataset {
    inner: core::Dataset,
}

#[pymethods]
impl PyDataset {
    #[new]
    #[pyo3(signature = (features, labels, name = "data", class_names = None))]
    fn new(features: Vec<Vec<f64>>, labels: Vec<u32>, name: &str, class_names: Option<Vec<String>>) -> PyResult<Self> {
        let labels = labels.into_iter().map(label).collect::<PyResult<Vec<_>>>()?;
        let inner = core::Dataset::new(name, features, labels, class_names.unwrap_or_default()).map_err(err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_keel(text: &str) -> PyResult<Self> {
        parse_keel(text)
    }

    fn to_keel(&self) -> String {
        core::write_keel(&self.inner)
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name().to_string()
    }

    #[getter]
    fn n_features(&self) -> usize {
        self.inner.n_features()
    }

    #[getter]
    fn features(&self) -> Vec<Vec<f64>> {
        self.inner.features().to_vec()
    }

    #[getter]
    fn labels(&self) -> Vec<u32> {
        self.inner.labels().iter().map(|l| l.0 as u32).collect()
    }

    #[getter]
    fn class_names(&self) -> Vec<String> {
        self.inner.class_names().to_vec()
    }

    #[getter]
    fn minority(&self) -> u8 {
        self.inner.minority().0
    }

    #[getter]
    fn class_counts(&self) -> (usize, usize) {
        let c = self.inner.class_counts();
        (c[0], c[1])
    }

    #[getter]
    fn imbalance_ratio(&self) -> f64 {
        self.inner.imbalance_ratio()
    }

    fn subset(&self, indices: Vec<usize>) -> PyResult<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.inner.len()) {
            return Err(err(format!("row {bad} out of range")));
        }
        Ok(Self {
            inner: self.inner.subset(&indices),
        })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        let c = self.inner.class_counts();
        format!(
            "Dataset(name={:?}, samples={}, features={}, class_counts=({}, {}))",
            self.inner.name(),
            self.inner.len(),
            self.inner.n_features(),
            c[0],
            c[1]
        )
    }
}

/// Bagged pool of linear classifiers.
#[pyclass(name = "Pool", module = "firedes", frozen)]
pub struct PyPool {
    inner: core::ClassifierPool,
}

#[pymethods]
impl PyPool {
    /// Builds a pool from `(weights, bias)` pairs.
    #[staticmethod]
    fn from_members(members: Vec<(Vec<f64>, f64)>) -> PyResult<Self> {
        let members = members
            .into_iter()
            .enumerate()
            .map(|(i, (w, b))| core::Perceptron::new(w, b, i))
            .collect();
        let inner = core::ClassifierPool::from_members(members, 0).map_err(err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: core::ClassifierPool::from_json(text).map_err(err)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(err)
    }

    #[getter]
    fn members(&self) -> Vec<(Vec<f64>, f64)> {
        self.inner.members.iter().map(|c| (c.weights.clone(), c.bias)).collect()
    }

    /// Crisp label of every member for one sample.
    fn predict(&self, x: Vec<f64>) -> PyResult<Vec<u32>> {
        self.inner
            .members
            .iter()
            .map(|c| c.try_margin(&x).map(|_| c.predict(&x).0 as u32).map_err(err))
            .collect()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

#[pyclass(name = "FilterResult", module = "firedes", frozen, get_all)]
pub struct PyFilterResult {
    kept: Vec<usize>,
    removed: Vec<usize>,
    guard_applied: bool,
    dataset: Py<PyDataset>,
}

/// Region of competence around one query, nearest member first.
#[pyclass(name = "Region", module = "firedes", frozen)]
pub struct PyRegion {
    inner: core::RegionOfCompetence,
}

#[pymethods]
impl PyRegion {
    #[getter]
    fn indices(&self) -> Vec<usize> {
        self.inner.indices()
    }

    #[getter]
    fn labels(&self) -> Vec<u32> {
        self.inner.members.iter().map(|m| m.label.0 as u32).collect()
    }

    #[getter]
    fn distances(&self) -> Vec<f64> {
        self.inner.members.iter().map(|m| m.distance).collect()
    }

    #[getter]
    fn shortfall(&self) -> (usize, usize) {
        (self.inner.shortfall[0], self.inner.shortfall[1])
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

#[pyclass(name = "Decision", module = "firedes", frozen, get_all)]
pub struct PyDecision {
    label: u8,
    positive_score: f64,
    selected: Vec<usize>,
}

impl From<core::Decision> for PyDecision {
    fn from(d: core::Decision) -> Self {
        Self {
            label: d.label.0,
            positive_score: d.positive_score,
            selected: d.selected_indices,
        }
    }
}

#[pyfunction]
fn parse_keel(text: &str) -> PyResult<PyDataset> {
    Ok(PyDataset {
        inner: core::parse_keel(text).map_err(err)?,
    })
}

#[pyfunction]
#[pyo3(signature = (train, size = 100, seed = 0))]
fn generate_pool(py: Python<'_>, train: &PyDataset, size: usize, seed: u64) -> PyResult<PyPool> {
    let inner = py.detach(|| core::generate_pool(&train.inner, size, seed)).map_err(err)?;
    Ok(PyPool { inner })
}

/// Edits `dataset` with `kind` ("enn" or "rng"); `k` is the ENN neighborhood.
#[pyfunction]
#[pyo3(signature = (dataset, kind = "enn", k = 3))]
fn filter_dataset(py: Python<'_>, dataset: &PyDataset, kind: &str, k: usize) -> PyResult<PyFilterResult> {
    let report = filter_select(parse::<FilterKind>(kind)?, &dataset.inner, k).map_err(err)?;
    let filtered = PyDataset {
        inner: report.apply(&dataset.inner),
    };
    Ok(PyFilterResult {
        kept: report.kept,
        removed: report.removed,
        guard_applied: report.guard_applied,
        dataset: Py::new(py, filtered)?,
    })
}

/// Undirected edges `(i, j)`, `i < j`, of the relative neighborhood graph.
#[pyfunction]
fn proximity_graph(dataset: &PyDataset) -> PyResult<Vec<(usize, usize)>> {
    Ok(core::build_proximity_graph(&dataset.inner).map_err(err)?.edges())
}

#[pyfunction]
fn knn_region(dataset: &PyDataset, query: Vec<f64>, k: usize) -> PyResult<PyRegion> {
    Ok(PyRegion {
        inner: core::knn_region(&dataset.inner, &query, k).map_err(err)?,
    })
}

/// `k` nearest samples of each class.
#[pyfunction]
fn knne_region(dataset: &PyDataset, query: Vec<f64>, k: usize) -> PyResult<PyRegion> {
    Ok(PyRegion {
        inner: core::knne_region(&dataset.inner, &query, k).map_err(err)?,
    })
}

/// Position pairs `(a, b)` within the region whose labels differ.
#[pyfunction]
fn frienemy_pairs(region: &PyRegion) -> Vec<(usize, usize)> {
    core::frienemy_pairs(&region.inner).pairs
}

/// Pool positions kept by frienemy pruning and whether the full-pool
/// fallback was used.
#[pyfunction]
fn dfp_prune(region: &PyRegion, pool: &PyPool) -> (Vec<usize>, bool) {
    let p = core::dfp_prune(&region.inner, &pool.inner.refs());
    (p.selected, p.fallback_used)
}

#[pyfunction]
#[pyo3(signature = (technique, pool, region, query, minority = 0))]
fn decide(technique: &str, pool: &PyPool, region: &PyRegion, query: Vec<f64>, minority: u32) -> PyResult<PyDecision> {
    let params = core::DesParams::default().with_minority(label(minority)?);
    let d = core::decide(parse::<Technique>(technique)?, &pool.inner.refs(), &region.inner, &query, &params)
        .map_err(err)?;
    Ok(d.into())
}

/// Classifies one query under a scenario ("I".."VIII"). The filter, when the
/// scenario uses one, is applied to `dsel` on every call.
#[pyfunction]
#[pyo3(signature = (query, pool, dsel, scenario = "VIII", technique = "KNE", k = 7, enn_k = 3))]
fn classify_query(
    query: Vec<f64>,
    pool: &PyPool,
    dsel: &PyDataset,
    scenario: &str,
    technique: &str,
    k: usize,
    enn_k: usize,
) -> PyResult<PyDecision> {
    let cfg = ScenarioConfig {
        k,
        enn_k,
        ..ScenarioConfig::new(parse::<Scenario>(scenario)?, parse::<Technique>(technique)?)
    };
    let prepared = prepare_dsel(&dsel.inner, &cfg).map_err(err)?;
    let d = core::classify_query(&query, &pool.inner.refs(), &prepared, &cfg).map_err(err)?;
    Ok(d.into())
}

#[pyfunction]
#[pyo3(signature = (scores, labels, positive = 1))]
fn auc(scores: Vec<f64>, labels: Vec<u32>, positive: u32) -> PyResult<f64> {
    let labels = labels.into_iter().map(label).collect::<PyResult<Vec<_>>>()?;
    core::auc(&scores, &labels, label(positive)?).map_err(err)
}

/// Full benchmark. Returns `(dataset, scenario, technique, replication, auc)`
/// rows and `(dataset, error)` failures.
#[pyfunction]
#[pyo3(signature = (datasets, scenarios = vec!["I".to_string(), "VIII".to_string()], techniques = vec!["KNE".to_string()], seed = 0, pool_size = 100, k = 7))]
#[allow(clippy::type_complexity)]
fn run_experiment(
    py: Python<'_>,
    datasets: Vec<PyRef<'_, PyDataset>>,
    scenarios: Vec<String>,
    techniques: Vec<String>,
    seed: u64,
    pool_size: usize,
    k: usize,
) -> PyResult<(Vec<(String, String, String, usize, f64)>, Vec<(String, String)>)> {
    let data: Vec<core::Dataset> = datasets.iter().map(|d| d.inner.clone()).collect();
    let scenarios = scenarios.iter().map(|s| parse::<Scenario>(s)).collect::<PyResult<Vec<_>>>()?;
    let techniques = techniques.iter().map(|s| parse::<Technique>(s)).collect::<PyResult<Vec<_>>>()?;
    let settings = ExperimentSettings {
        seed,
        pool_size,
        k,
        ..ExperimentSettings::default()
    };
    let out = py.detach(|| core::run_experiment(&data, &scenarios, &techniques, &settings));
    let rows = out
        .results
        .into_iter()
        .map(|r| (r.dataset, r.scenario.to_string(), r.technique.to_string(), r.replication_id, r.auc))
        .collect();
    let failures = out.failures.into_iter().map(|f| (f.dataset, f.error)).collect();
    Ok((rows, failures))
}

#[pyfunction]
#[pyo3(signature = (k, n_blocks, alpha = 0.10))]
fn nemenyi_cd(k: usize, n_blocks: usize, alpha: f64) -> PyResult<f64> {
    stats::nemenyi_cd(k, n_blocks, alpha).map_err(err)
}

#[pyfunction]
fn sign_test_critical(n: usize, alpha: f64) -> PyResult<f64> {
    stats::sign_test_critical(n, alpha).map_err(err)
}

/// `(statistic, p_value)` of the paired signed-rank test.
#[pyfunction]
#[pyo3(signature = (a, b, alpha = 0.05))]
fn wilcoxon(a: Vec<f64>, b: Vec<f64>, alpha: f64) -> PyResult<(f64, f64)> {
    let r = stats::wilcoxon_signed_rank(&a, &b, alpha).map_err(err)?;
    Ok((r.statistic, r.p_value))
}

/// `(statistic, p_value)` over a blocks-by-methods score table, higher
/// scores ranking first.
#[pyfunction]
#[pyo3(signature = (scores, alpha = 0.05))]
fn friedman(scores: Vec<Vec<f64>>, alpha: f64) -> PyResult<(f64, f64)> {
    let k = scores.first().map_or(0, Vec::len);
    let table = stats::RankTable::new(
        (0..k).map(|i| format!("m{i}")).collect(),
        (0..scores.len()).map(|i| format!("b{i}")).collect(),
        scores,
    )
    .map_err(err)?;
    let r = stats::friedman(&table, alpha).map_err(err)?;
    Ok((r.statistic, r.p_value))
}

/// Groups of methods whose average ranks lie within `cd` of each other.
#[pyfunction]
fn cliques(ranks: Vec<f64>, cd: f64) -> Vec<Vec<usize>> {
    stats::cliques(&ranks, cd)
}

#[pymodule]
fn firedes(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyDataset>()?;
    m.add_class::<PyPool>()?;
    m.add_class::<PyFilterResult>()?;
    m.add_class::<PyRegion>()?;
    m.add_class::<PyDecision>()?;
    m.add_function(wrap_pyfunction!(parse_keel, m)?)?;
    m.add_function(wrap_pyfunction!(generate_pool, m)?)?;
    m.add_function(wrap_pyfunction!(filter_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(proximity_graph, m)?)?;
    m.add_function(wrap_pyfunction!(knn_region, m)?)?;
    m.add_function(wrap_pyfunction!(knne_region, m)?)?;
    m.add_function(wrap_pyfunction!(frienemy_pairs, m)?)?;
    m.add_function(wrap_pyfunction!(dfp_prune, m)?)?;
    m.add_function(wrap_pyfunction!(decide, m)?)?;
    m.add_function(wrap_pyfunction!(classify_query, m)?)?;
    m.add_function(wrap_pyfunction!(auc, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(nemenyi_cd, m)?)?;
    m.add_function(wrap_pyfunction!(sign_test_critical, m)?)?;
    m.add_function(wrap_pyfunction!(wilcoxon, m)?)?;
    m.add_function(wrap_pyfunction!(friedman, m)?)?;
    m.add_function(wrap_pyfunction!(cliques, m)?)?;
    Ok(())
}
