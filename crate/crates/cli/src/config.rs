use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use firedes_core::des::{DesParams, Technique};
use firedes_core::filtering::DEFAULT_ENN_K;
use firedes_core::pipeline::{ExperimentSettings, Scenario, DEFAULT_POOL_SIZE};
use firedes_core::region::DEFAULT_K;
use firedes_core::FilterKind;
use serde::{Deserialize, Serialize};

use crate::{usage, CliResult};

/// `"all"`, a comma separated string, or a list of names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Selection {
    One(String),
    Many(Vec<String>),
}

impl Default for Selection {
    fn default() -> Self {
        Selection::One("all".into())
    }
}

impl Selection {
    fn items(&self) -> Vec<String> {
        let raw: Vec<&str> = match self {
            Selection::One(s) => s.split(',').collect(),
            Selection::Many(v) => v.iter().flat_map(|s| s.split(',')).collect(),
        };
        raw.into_iter()
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect()
    }

    fn resolve<T: Copy + Ord + std::str::FromStr>(&self, all: &[T], what: &str) -> CliResult<Vec<T>>
    where
        T::Err: std::fmt::Display,
    {
        let items = self.items();
        if items.is_empty() {
            return Err(usage(format!("empty {what} selection")));
        }
        let mut out = BTreeSet::new();
        for item in items {
            if item.eq_ignore_ascii_case("all") {
                out.extend(all.iter().copied());
            } else {
                out.insert(item.parse::<T>().map_err(|e| usage(format!("{what}: {e}")))?);
            }
        }
        Ok(out.into_iter().collect())
    }

    pub fn scenarios(&self) -> CliResult<Vec<Scenario>> {
        self.resolve(&Scenario::ALL, "scenarios")
    }

    pub fn techniques(&self) -> CliResult<Vec<Technique>> {
        self.resolve(&Technique::ALL, "techniques")
    }
}

/// Technique thresholds exposed in the config file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TechniqueParams {
    pub mcb_sim_threshold: f64,
    pub mcb_diff_threshold: f64,
    pub desknn_pct_accuracy: f64,
    pub desknn_pct_diversity: f64,
}

impl Default for TechniqueParams {
    fn default() -> Self {
        let d = DesParams::default();
        Self {
            mcb_sim_threshold: d.mcb_sim_threshold,
            mcb_diff_threshold: d.mcb_diff_threshold,
            desknn_pct_accuracy: d.desknn_pct_accuracy,
            desknn_pct_diversity: d.desknn_pct_diversity,
        }
    }
}

impl From<TechniqueParams> for DesParams {
    fn from(p: TechniqueParams) -> Self {
        DesParams {
            mcb_sim_threshold: p.mcb_sim_threshold,
            mcb_diff_threshold: p.mcb_diff_threshold,
            desknn_pct_accuracy: p.desknn_pct_accuracy,
            desknn_pct_diversity: p.desknn_pct_diversity,
            ..DesParams::default()
        }
    }
}

/// Experiment description read from a JSON file. Every field is optional;
/// unknown keys are rejected. Relative dataset paths in a file resolve
/// against the file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// KEEL files, or directories whose `.dat` files are all used.
    pub datasets: Vec<PathBuf>,
    pub scenarios: Selection,
    pub techniques: Selection,
    pub filter: FilterKind,
    /// Region size (per class under KNNE).
    pub k: usize,
    pub enn_k: usize,
    pub pool_size: usize,
    pub seed: u64,
    pub out: PathBuf,
    /// Worker threads; all cores when absent.
    pub jobs: Option<usize>,
    pub record_decisions: bool,
    pub params: TechniqueParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            datasets: Vec::new(),
            scenarios: Selection::default(),
            techniques: Selection::default(),
            filter: FilterKind::Enn,
            k: DEFAULT_K,
            enn_k: DEFAULT_ENN_K,
            pool_size: DEFAULT_POOL_SIZE,
            seed: 0,
            out: PathBuf::from("out"),
            jobs: None,
            record_decisions: false,
            params: TechniqueParams::default(),
        }
    }
}

/// A config that passed validation, with dataset files enumerated.
#[derive(Debug, Clone)]
pub struct ValidRun {
    pub files: Vec<PathBuf>,
    pub scenarios: Vec<Scenario>,
    pub techniques: Vec<Technique>,
    pub settings: ExperimentSettings,
    pub out: PathBuf,
    pub jobs: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| usage(format!("invalid config: {e}")))
    }

    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for d in &mut cfg.datasets {
            if d.is_relative() {
                *d = base.join(&*d);
            }
        }
        Ok(cfg)
    }

    /// Checks everything that can be checked before any compute.
    pub fn validate(&self) -> CliResult<ValidRun> {
        if self.datasets.is_empty() {
            return Err(usage("no datasets given"));
        }
        if self.k == 0 || self.enn_k == 0 || self.pool_size == 0 {
            return Err(usage("k, enn_k and pool_size must be at least 1"));
        }
        if self.jobs == Some(0) {
            return Err(usage("jobs must be at least 1"));
        }
        let p = &self.params;
        let fractions = [p.mcb_sim_threshold, p.desknn_pct_accuracy, p.desknn_pct_diversity];
        if fractions.iter().any(|v| !(0.0..=1.0).contains(v)) || p.mcb_diff_threshold.is_nan() || p.mcb_diff_threshold < 0.0 {
            return Err(usage("technique parameters out of range"));
        }
        let scenarios = self.scenarios.scenarios()?;
        let techniques = self.techniques.techniques()?;

        let mut files = Vec::new();
        for path in &self.datasets {
            if path.is_dir() {
                let mut found: Vec<PathBuf> = std::fs::read_dir(path)
                    .map_err(|e| usage(format!("{}: {e}", path.display())))?
                    .filter_map(|e| e.ok().map(|e| e.path()))
                    .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "dat"))
                    .collect();
                if found.is_empty() {
                    return Err(usage(format!("no .dat files in {}", path.display())));
                }
                found.sort();
                files.extend(found);
            } else if path.is_file() {
                files.push(path.clone());
            } else {
                return Err(usage(format!("dataset path not found: {}", path.display())));
            }
        }
        let mut stems = BTreeSet::new();
        for f in &files {
            let stem = f.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            if !stems.insert(stem.clone()) {
                return Err(usage(format!("duplicate dataset name `{stem}`")));
            }
        }

        Ok(ValidRun {
            files,
            scenarios,
            techniques,
            settings: ExperimentSettings {
                k: self.k,
                filter_kind: self.filter,
                enn_k: self.enn_k,
                pool_size: self.pool_size,
                seed: self.seed,
                params: self.params.into(),
                record_decisions: self.record_decisions,
            },
            out: self.out.clone(),
            jobs: self.jobs,
        })
    }
}
