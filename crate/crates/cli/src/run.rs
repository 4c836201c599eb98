use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use firedes_core::pipeline::{summarize, DatasetFailure, ResultsDocument, SummaryRow};
use firedes_core::run_experiment;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::{load_dataset, runtime, CliResult};

pub const RESULTS_FILE: &str = "results.json";
pub const SUMMARY_FILE: &str = "summary.txt";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Serialize)]
pub struct DatasetInfo {
    pub name: String,
    pub path: PathBuf,
    pub samples: usize,
    pub features: usize,
    pub imbalance_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timings {
    pub load_ms: u128,
    pub run_ms: u128,
    pub write_ms: u128,
}

/// Everything about a run except the results themselves.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub seed: u64,
    pub threads: usize,
    pub config: ExperimentConfig,
    pub datasets: Vec<DatasetInfo>,
    pub failures: Vec<DatasetFailure>,
    pub results: usize,
    pub timings: Timings,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub out: PathBuf,
    pub results: usize,
    pub failures: Vec<DatasetFailure>,
    pub summary: String,
}

/// Validates `cfg`, runs the experiment and writes results, summary and
/// manifest under `cfg.out`. Nothing is written when validation fails.
/// Datasets that fail are listed in the manifest; the run fails only when
/// none succeeds.
pub fn cmd_run(cfg: &ExperimentConfig) -> CliResult<RunReport> {
    let valid = cfg.validate()?;

    let t0 = Instant::now();
    let mut datasets = Vec::new();
    let mut infos = Vec::new();
    let mut failures = Vec::new();
    for path in &valid.files {
        match load_dataset(path) {
            Ok(d) => {
                infos.push(DatasetInfo {
                    name: d.name().to_string(),
                    path: path.clone(),
                    samples: d.len(),
                    features: d.n_features(),
                    imbalance_ratio: d.imbalance_ratio(),
                });
                datasets.push(d);
            }
            Err(e) => failures.push(DatasetFailure {
                dataset: path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
                error: e.to_string(),
            }),
        }
    }
    let load_ms = t0.elapsed().as_millis();

    let t1 = Instant::now();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = valid.jobs {
        builder = builder.num_threads(j);
    }
    let pool = builder.build().map_err(runtime)?;
    let threads = pool.current_num_threads();
    let outcome = pool.install(|| run_experiment(&datasets, &valid.scenarios, &valid.techniques, &valid.settings));
    let run_ms = t1.elapsed().as_millis();
    failures.extend(outcome.failures);
    failures.sort_by(|a, b| a.dataset.cmp(&b.dataset));

    let t2 = Instant::now();
    let rows = summarize(&outcome.results);
    let summary = summary_table(&rows);
    let n_results = outcome.results.len();
    let doc = ResultsDocument::new(outcome.results);
    std::fs::create_dir_all(&valid.out).map_err(|e| runtime(format!("{}: {e}", valid.out.display())))?;
    if n_results > 0 {
        write(&valid.out.join(RESULTS_FILE), &(doc.to_json().map_err(runtime)? + "\n"))?;
        write(&valid.out.join(SUMMARY_FILE), &summary)?;
    }
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        seed: cfg.seed,
        threads,
        config: cfg.clone(),
        datasets: infos,
        failures: failures.clone(),
        results: n_results,
        timings: Timings {
            load_ms,
            run_ms,
            write_ms: t2.elapsed().as_millis(),
        },
    };
    write(
        &valid.out.join(MANIFEST_FILE),
        &(serde_json::to_string_pretty(&manifest).map_err(runtime)? + "\n"),
    )?;

    if n_results == 0 {
        let why: Vec<String> = failures.iter().map(|f| format!("{}: {}", f.dataset, f.error)).collect();
        return Err(runtime(format!("no dataset succeeded ({})", why.join("; "))));
    }
    Ok(RunReport {
        out: valid.out,
        results: n_results,
        failures,
        summary,
    })
}

pub(crate) fn write(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| runtime(format!("{}: {e}", path.display())))
}

/// Datasets down, scenario/technique across, `mean ± std` in each cell and
/// the cross-dataset average in the last row.
pub fn summary_table(rows: &[SummaryRow]) -> String {
    let mut columns: Vec<String> = Vec::new();
    let mut cells: BTreeMap<String, BTreeMap<String, (f64, f64)>> = BTreeMap::new();
    let mut order: Vec<_> = rows.iter().map(|r| (r.scenario, r.technique)).collect();
    order.sort();
    order.dedup();
    for (s, t) in &order {
        columns.push(format!("{t}-{s}"));
    }
    for r in rows {
        cells
            .entry(r.dataset.clone())
            .or_default()
            .insert(format!("{}-{}", r.technique, r.scenario), (r.mean, r.std));
    }
    let name_w = cells.keys().map(|k| k.len()).max().unwrap_or(0).max("dataset".len());
    let col_w = columns.iter().map(|c| c.len()).max().unwrap_or(0).max(15);

    let mut out = String::new();
    let _ = write!(out, "{:<name_w$}", "dataset");
    for c in &columns {
        let _ = write!(out, "  {c:>col_w$}");
    }
    out.push('\n');
    let mut sums = vec![(0.0, 0usize); columns.len()];
    for (name, row) in &cells {
        let _ = write!(out, "{name:<name_w$}");
        for (i, c) in columns.iter().enumerate() {
            match row.get(c) {
                Some(&(m, s)) => {
                    sums[i].0 += m;
                    sums[i].1 += 1;
                    let _ = write!(out, "  {:>col_w$}", format!("{m:.4} ± {s:.4}"));
                }
                None => {
                    let _ = write!(out, "  {:>col_w$}", "-");
                }
            }
        }
        out.push('\n');
    }
    let _ = write!(out, "{:<name_w$}", "average");
    for (sum, n) in sums {
        let cell = if n == 0 { "-".to_string() } else { format!("{:.4}", sum / n as f64) };
        let _ = write!(out, "  {cell:>col_w$}");
    }
    out.push('\n');
    out
}
