use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod config;

use config::{Overrides, RunConfig};

/// Label-graph information measurement and greedy subset selection.
#[derive(Debug, Parser)]
#[command(name = "mig", version)]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the label graph artifact from a pool and label embeddings
    BuildGraph(BuildGraphArgs),
    /// Select a fixed-size subset by information gain
    Select(SelectArgs),
    /// Measure the information of a pool or subset
    Score(ScoreArgs),
    /// Label and quality statistics, optionally for a selection against its pool
    Stats(StatsArgs),
    /// Compare selection against baseline selectors on one pool
    Baseline(BaselineArgs),
    /// Parameter sweeps over α and T on a synthetic or supplied pool
    Bench(BenchArgs),
}

#[derive(Debug, clap::Args)]
pub struct BuildGraphArgs {
    #[arg(long)]
    pub pool: Option<PathBuf>,
    /// `K dim` embedding table
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Label names for the embedding rows (default: `<embeddings>.labels` if present)
    #[arg(long)]
    pub label_order: Option<PathBuf>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Drop labels seen fewer times
    #[arg(long)]
    pub min_freq: Option<u64>,
    /// Merge labels at least this similar
    #[arg(long)]
    pub merge_sim: Option<f64>,
    /// Write the original-to-representative label table here
    #[arg(long)]
    pub remap_out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct SelectArgs {
    #[arg(long)]
    pub pool: Option<PathBuf>,
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Number of records to select
    #[arg(long, short = 'n')]
    pub budget: Option<usize>,
    /// Selected records, verbatim, in selection order
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// JSON report (default: `<output>.report.json`)
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Accept a graph built from a different pool vocabulary
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, clap::Args)]
pub struct ScoreArgs {
    #[arg(long)]
    pub pool: Option<PathBuf>,
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Score this file instead of the whole pool
    #[arg(long)]
    pub subset: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, clap::Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub pool: Option<PathBuf>,
    /// Selected records to compare against the pool
    #[arg(long)]
    pub selection: Option<PathBuf>,
    /// Only list this many labels in the histogram
    #[arg(long)]
    pub top: Option<usize>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BaselineMethod {
    Mig,
    Random,
    Quality,
    FacilityLocation,
}

#[derive(Debug, clap::Args)]
pub struct BaselineArgs {
    #[arg(long)]
    pub pool: Option<PathBuf>,
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long, short = 'n')]
    pub budget: Option<usize>,
    #[arg(long, value_delimiter = ',', default_value = "mig,random,quality")]
    pub methods: Vec<BaselineMethod>,
    /// `n dim` point embedding table, required for facility-location
    #[arg(long)]
    pub point_embeddings: Option<PathBuf>,
    /// Quality weight in the facility-location objective
    #[arg(long, default_value_t = 0.7)]
    pub alpha_mix: f64,
    /// Stop facility-location after this many seconds
    #[arg(long)]
    pub deadline_secs: Option<f64>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepChoice {
    Alpha,
    Threshold,
    Both,
}

#[derive(Debug, clap::Args)]
pub struct BenchArgs {
    /// Real pool to sweep instead of a synthetic one (needs --embeddings)
    #[arg(long)]
    pub pool: Option<PathBuf>,
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    #[arg(long, default_value_t = 3000)]
    pub points: usize,
    #[arg(long, default_value_t = 300)]
    pub labels: usize,
    #[arg(long, default_value_t = 1)]
    pub min_labels: usize,
    #[arg(long, default_value_t = 5)]
    pub max_labels: usize,
    #[arg(long, short = 'n', default_value_t = 300)]
    pub budget: usize,
    #[arg(long, value_enum, default_value_t = SweepChoice::Both)]
    pub axis: SweepChoice,
    /// Comma-separated α values
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
    /// Comma-separated thresholds
    #[arg(long, value_delimiter = ',')]
    pub thresholds: Option<Vec<f64>>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cfg = match RunConfig::load(cli.overrides.config.as_deref()) {
        Ok(cfg) => cfg,
        Err(e) => return commands::report_error(&e),
    };
    cli.overrides.apply(&mut cfg);
    commands::init_logging(&cfg.log_level);
    if let Err(e) = commands::init_threads(cfg.threads) {
        return commands::report_error(&e);
    }
    let result = match cli.command {
        Command::BuildGraph(args) => commands::build_graph(cfg, args),
        Command::Select(args) => commands::select(cfg, args),
        Command::Score(args) => commands::score(cfg, args),
        Command::Stats(args) => commands::stats(cfg, args),
        Command::Baseline(args) => commands::baseline(cfg, args),
        Command::Bench(args) => commands::bench(cfg, args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => commands::report_error(&e),
    }
}
