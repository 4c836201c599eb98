use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use firedes_core::des::Technique;
use firedes_core::pipeline::{summarize, ResultsDocument, Scenario};
use firedes_core::stats::{
    emit_cd_diagram, friedman, nemenyi_cd, nemenyi_q, sign_test, sign_test_critical, wilcoxon_signed_rank,
    RankTable, SignTest, TestReport,
};
use serde::{Deserialize, Serialize};

use crate::config::Selection;
use crate::run::{summary_table, write};
use crate::{runtime, usage, CliResult};

pub const REPORT_FILE: &str = "stats_report.json";
pub const SVG_FILE: &str = "cd_diagram.svg";
pub const TEXT_FILE: &str = "cd_diagram.txt";

/// What the compared methods are. The remaining factors, together with the
/// dataset, form the blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupBy {
    /// Methods are scenarios; blocks are (dataset, technique).
    Scenario,
    /// Methods are techniques; blocks are (dataset, scenario).
    Technique,
    /// Methods are technique-scenario pairs; blocks are datasets.
    Both,
}

impl FromStr for GroupBy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "scenario" => Ok(GroupBy::Scenario),
            "technique" => Ok(GroupBy::Technique),
            "both" => Ok(GroupBy::Both),
            _ => Err(format!("unknown grouping `{s}` (scenario, technique, both)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct StatsOptions {
    pub results: PathBuf,
    pub out: PathBuf,
    pub group_by: GroupBy,
    pub alpha: f64,
    pub scenarios: Option<Selection>,
    pub techniques: Option<Selection>,
    /// Pairwise comparisons as `A:B` method names.
    pub pairs: Vec<String>,
}

impl StatsOptions {
    pub fn new(results: impl Into<PathBuf>, out: impl Into<PathBuf>) -> Self {
        Self {
            results: results.into(),
            out: out.into(),
            group_by: GroupBy::Scenario,
            alpha: 0.10,
            scenarios: None,
            techniques: None,
            pairs: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodRank {
    pub method: String,
    pub average_rank: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Nemenyi {
    pub alpha: f64,
    pub q: f64,
    pub cd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairReport {
    pub a: String,
    pub b: String,
    pub mean_a: f64,
    pub mean_b: f64,
    pub wilcoxon: Option<TestReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wilcoxon_error: Option<String>,
    pub sign_test: SignTest,
    /// Sign-test critical win counts at alpha 0.10, 0.05 and 0.01.
    pub sign_thresholds: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsReport {
    pub blocks: usize,
    pub methods: Vec<String>,
    pub average_ranks: Vec<MethodRank>,
    pub friedman: TestReport,
    pub nemenyi: Nemenyi,
    pub cliques: Vec<Vec<String>>,
    pub pairs: Vec<PairReport>,
}

/// Mean AUC over replications, one row per block and one column per method.
pub fn rank_table_from_results(
    doc: &ResultsDocument,
    group_by: GroupBy,
    scenarios: Option<&[Scenario]>,
    techniques: Option<&[Technique]>,
) -> CliResult<RankTable> {
    let keep = |s: Scenario, t: Technique| {
        scenarios.is_none_or(|v| v.contains(&s)) && techniques.is_none_or(|v| v.contains(&t))
    };
    let mut methods: BTreeMap<(Option<Scenario>, Option<Technique>), String> = BTreeMap::new();
    let mut blocks: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    for row in summarize(&doc.results) {
        if !keep(row.scenario, row.technique) {
            continue;
        }
        let (key, method, block) = match group_by {
            GroupBy::Scenario => (
                (Some(row.scenario), None),
                row.scenario.to_string(),
                format!("{}/{}", row.dataset, row.technique),
            ),
            GroupBy::Technique => (
                (None, Some(row.technique)),
                row.technique.to_string(),
                format!("{}/{}", row.dataset, row.scenario),
            ),
            GroupBy::Both => (
                (Some(row.scenario), Some(row.technique)),
                format!("{}-{}", row.technique, row.scenario),
                row.dataset.clone(),
            ),
        };
        methods.insert(key, method.clone());
        blocks.entry(block).or_default().insert(method, row.mean);
    }
    let methods: Vec<String> = methods.into_values().collect();
    if blocks.is_empty() {
        return Err(usage("no results match the selection"));
    }
    let wanted: BTreeSet<&String> = methods.iter().collect();
    let mut scores = Vec::with_capacity(blocks.len());
    for (name, row) in &blocks {
        let have: BTreeSet<&String> = row.keys().collect();
        if have != wanted {
            let missing: Vec<&str> = wanted.difference(&have).map(|s| s.as_str()).collect();
            return Err(usage(format!(
                "mismatched method sets: block `{name}` lacks {}",
                missing.join(", ")
            )));
        }
        scores.push(methods.iter().map(|m| row[m]).collect());
    }
    RankTable::new(methods, blocks.into_keys().collect(), scores).map_err(|e| usage(e.to_string()))
}

/// Friedman, Nemenyi and the requested pairwise tests over a rank table.
pub fn analyze(table: &RankTable, alpha: f64, pairs: &[String]) -> CliResult<StatsReport> {
    let fr = friedman(table, alpha).map_err(|e| usage(e.to_string()))?;
    let (k, n) = (table.k(), table.n_blocks());
    let q = nemenyi_q(k, alpha).map_err(|e| usage(e.to_string()))?;
    let cd = nemenyi_cd(k, n, alpha).map_err(|e| usage(e.to_string()))?;
    let ranks = table.average_ranks();
    let diagram = emit_cd_diagram(&table.methods, &ranks, cd).map_err(runtime)?;

    let mut pair_reports = Vec::new();
    for spec in pairs {
        let (a, b) = spec
            .split_once(':')
            .ok_or_else(|| usage(format!("pair `{spec}` is not of the form A:B")))?;
        let idx = |m: &str| {
            table
                .method_index(m)
                .ok_or_else(|| usage(format!("pair `{spec}`: unknown method `{m}`")))
        };
        let (ia, ib) = (idx(a)?, idx(b)?);
        let (ca, cb) = (table.column(ia), table.column(ib));
        let (wilcoxon, wilcoxon_error) = match wilcoxon_signed_rank(&ca, &cb, alpha) {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let mut sign_thresholds = BTreeMap::new();
        for level in [0.10, 0.05, 0.01] {
            sign_thresholds.insert(format!("{level:.2}"), sign_test_critical(n, level).map_err(runtime)?);
        }
        pair_reports.push(PairReport {
            a: a.to_string(),
            b: b.to_string(),
            mean_a: ca.iter().sum::<f64>() / n as f64,
            mean_b: cb.iter().sum::<f64>() / n as f64,
            wilcoxon,
            wilcoxon_error,
            sign_test: sign_test(&ca, &cb, alpha).map_err(|e| usage(e.to_string()))?,
            sign_thresholds,
        });
    }

    Ok(StatsReport {
        blocks: n,
        methods: table.methods.clone(),
        average_ranks: table
            .methods
            .iter()
            .zip(&ranks)
            .map(|(m, &r)| MethodRank {
                method: m.clone(),
                average_rank: r,
            })
            .collect(),
        friedman: fr,
        nemenyi: Nemenyi { alpha, q, cd },
        cliques: diagram.cliques,
        pairs: pair_reports,
    })
}

/// Human readable digest of a [`StatsReport`].
pub fn render(report: &StatsReport) -> String {
    let mut s = String::new();
    let f = &report.friedman;
    let _ = writeln!(
        s,
        "Friedman: chi2 = {:.4}, p = {:.4e} (log10 p = {:.2}), {} blocks x {} methods",
        f.statistic,
        f.p_value,
        f.log10_p,
        report.blocks,
        report.methods.len()
    );
    let _ = writeln!(s, "Nemenyi: q = {:.4}, CD = {:.4} at alpha {}", report.nemenyi.q, report.nemenyi.cd, report.nemenyi.alpha);
    let mut ranked = report.average_ranks.clone();
    ranked.sort_by(|a, b| a.average_rank.total_cmp(&b.average_rank));
    for r in &ranked {
        let _ = writeln!(s, "  {:>8.4}  {}", r.average_rank, r.method);
    }
    for p in &report.pairs {
        let _ = writeln!(s, "{} vs {}: mean {:.4} vs {:.4}", p.a, p.b, p.mean_a, p.mean_b);
        match (&p.wilcoxon, &p.wilcoxon_error) {
            (Some(w), _) => {
                let _ = writeln!(s, "  Wilcoxon: W+ = {:.1}, p = {:.4e}", w.statistic, w.p_value);
            }
            (None, Some(e)) => {
                let _ = writeln!(s, "  Wilcoxon: not computed ({e})");
            }
            _ => {}
        }
        let st = &p.sign_test;
        let th: Vec<String> = p.sign_thresholds.iter().map(|(a, v)| format!("{v:.2} (alpha {a})")).collect();
        let _ = writeln!(
            s,
            "  Sign test: {} wins, {} ties, {} losses of {}; thresholds {}",
            st.wins,
            st.ties,
            st.losses,
            st.n,
            th.join(", ")
        );
    }
    s
}

fn read_results(path: &Path) -> CliResult<ResultsDocument> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    ResultsDocument::from_json(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// Rank analysis of a results file. Writes the JSON report and both CD
/// diagram renderings under `opts.out` and returns the text digest.
pub fn cmd_stats(opts: &StatsOptions) -> CliResult<(StatsReport, String)> {
    if !(opts.alpha > 0.0 && opts.alpha < 1.0) {
        return Err(usage("alpha must lie in (0, 1)"));
    }
    let doc = read_results(&opts.results)?;
    let scenarios = opts.scenarios.as_ref().map(Selection::scenarios).transpose()?;
    let techniques = opts.techniques.as_ref().map(Selection::techniques).transpose()?;
    let table = rank_table_from_results(&doc, opts.group_by, scenarios.as_deref(), techniques.as_deref())?;
    if table.k() < 2 {
        return Err(usage("need at least 2 methods to compare"));
    }
    let report = analyze(&table, opts.alpha, &opts.pairs)?;
    let diagram = emit_cd_diagram(&table.methods, &table.average_ranks(), report.nemenyi.cd).map_err(runtime)?;

    std::fs::create_dir_all(&opts.out).map_err(|e| runtime(format!("{}: {e}", opts.out.display())))?;
    write(
        &opts.out.join(REPORT_FILE),
        &(serde_json::to_string_pretty(&report).map_err(runtime)? + "\n"),
    )?;
    write(&opts.out.join(SVG_FILE), &diagram.svg)?;
    write(&opts.out.join(TEXT_FILE), &diagram.text)?;
    let text = render(&report);
    Ok((report, text))
}

/// Per-dataset summary table of a results file, optionally written to
/// `out/report.txt`.
pub fn cmd_report(results: &Path, out: Option<&Path>) -> CliResult<String> {
    let doc = read_results(results)?;
    let table = summary_table(&summarize(&doc.results));
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| runtime(format!("{}: {e}", dir.display())))?;
        write(&dir.join("report.txt"), &table)?;
    }
    Ok(table)
}
