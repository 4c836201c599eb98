use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use firedes_cli::{
    cmd_filter, cmd_report, cmd_run, cmd_stats, CliError, ExperimentConfig, GroupBy, Selection, StatsOptions,
};
use firedes_core::filtering::DEFAULT_ENN_K;
use firedes_core::FilterKind;

#[derive(Parser)]
#[command(name = "firedes", version, about = "Dynamic ensemble selection benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write results.json, summary.txt and manifest.json.
    Run(RunArgs),
    /// Apply one prototype-selection filter to a dataset and print the report.
    Filter(FilterArgs),
    /// Friedman, Nemenyi and pairwise tests over a results file.
    Stats(StatsArgs),
    /// Per-dataset mean ± std table of a results file.
    Report(ReportArgs),
}

fn parse_filter(s: &str) -> Result<FilterKind, String> {
    s.parse::<FilterKind>().map_err(|e| e.to_string())
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// KEEL files or directories, appended to the config's list.
    datasets: Vec<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    jobs: Option<usize>,
    /// Comma separated scenario names (I..VIII) or `all`.
    #[arg(long)]
    scenarios: Option<String>,
    /// Comma separated technique names or `all`.
    #[arg(long)]
    techniques: Option<String>,
    #[arg(long, value_parser = parse_filter)]
    filter: Option<FilterKind>,
    /// Region size (per class under KNNE).
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    pool_size: Option<usize>,
}

#[derive(Args)]
struct FilterArgs {
    dataset: PathBuf,
    #[arg(long, value_parser = parse_filter, default_value = "enn")]
    filter: FilterKind,
    /// ENN neighborhood size.
    #[arg(long, default_value_t = DEFAULT_ENN_K)]
    k: usize,
}

#[derive(Args)]
struct StatsArgs {
    results: PathBuf,
    #[arg(long, default_value = "stats")]
    out: PathBuf,
    /// scenario, technique or both.
    #[arg(long, default_value = "scenario")]
    group_by: GroupBy,
    #[arg(long, default_value_t = 0.10)]
    alpha: f64,
    #[arg(long)]
    scenarios: Option<String>,
    #[arg(long)]
    techniques: Option<String>,
    /// Pairwise comparison `A:B`; repeatable.
    #[arg(long = "pair")]
    pairs: Vec<String>,
}

#[derive(Args)]
struct ReportArgs {
    results: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(args: RunArgs) -> Result<(), CliError> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    cfg.datasets.extend(args.datasets);
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.out {
        cfg.out = v;
    }
    if let Some(v) = args.jobs {
        cfg.jobs = Some(v);
    }
    if let Some(v) = args.scenarios {
        cfg.scenarios = Selection::One(v);
    }
    if let Some(v) = args.techniques {
        cfg.techniques = Selection::One(v);
    }
    if let Some(v) = args.filter {
        cfg.filter = v;
    }
    if let Some(v) = args.k {
        cfg.k = v;
    }
    if let Some(v) = args.pool_size {
        cfg.pool_size = v;
    }
    let report = cmd_run(&cfg)?;
    print!("{}", report.summary);
    for f in &report.failures {
        eprintln!("dataset {} failed: {}", f.dataset, f.error);
    }
    eprintln!("{} results written to {}", report.results, report.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => run(args),
        Command::Filter(args) => cmd_filter(&args.dataset, args.filter, args.k).map(|json| println!("{json}")),
        Command::Stats(args) => {
            let opts = StatsOptions {
                results: args.results,
                out: args.out,
                group_by: args.group_by,
                alpha: args.alpha,
                scenarios: args.scenarios.map(Selection::One),
                techniques: args.techniques.map(Selection::One),
                pairs: args.pairs,
            };
            cmd_stats(&opts).map(|(_, text)| print!("{text}"))
        }
        Command::Report(args) => cmd_report(&args.results, args.out.as_deref()).map(|t| print!("{t}")),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
