//! `gnrisk`: command-line driver for the guarantee-network risk pipeline.
//!
//! Settings are layered: built-in defaults, then `--config`, then `--set`,
//! then subcommand flags given on the command line, then `--seed`.

mod commands;
mod manifest;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::parser::ValueSource;
use clap::{ArgAction, ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use gnrisk::community::Method;
use gnrisk::eval::RollingConfig;
use gnrisk::features::{Ablation, SnapshotOptions};
use gnrisk::gbdt::TrainParams;
use gnrisk::synth::SynthConfig;
use gnrisk::Quarter;

#[derive(Debug, Parser)]
#[command(
    name = "gnrisk",
    version,
    about = "Guarantee-network credit-risk pipeline on loan records"
)]
struct Cli {
    /// Directory holding customers.csv, contracts.csv, guarantees.csv and repayments.csv
    #[arg(
        long,
        global = true,
        help_heading = "Global options",
        default_value = "data"
    )]
    data_dir: PathBuf,

    /// Directory all outputs and manifest.json are written to
    #[arg(
        long,
        global = true,
        help_heading = "Global options",
        default_value = "out"
    )]
    out_dir: PathBuf,

    /// Generator seed; when given it overrides every other source
    #[arg(long, global = true, help_heading = "Global options", default_value_t = SynthConfig::default().seed)]
    seed: u64,

    /// Flat key=value settings file [default: none]
    #[arg(
        long,
        global = true,
        help_heading = "Global options",
        value_name = "FILE"
    )]
    config: Option<PathBuf>,

    /// Worker threads (0 = one per core)
    #[arg(
        long,
        global = true,
        help_heading = "Global options",
        default_value_t = 0
    )]
    threads: usize,

    /// Set one configuration key, after --config and before subcommand flags (repeatable) [default: none]
    #[arg(
        long = "set",
        global = true,
        help_heading = "Global options",
        value_name = "KEY=VALUE"
    )]
    overrides: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic loan dataset
    Synth(SynthArgs),
    /// Portfolio statistics: default rate, loan periods, monthly defaults, component sizes
    Stats,
    /// Components of one network snapshot and network complexity per month
    Graph(AsOfArgs),
    /// Centrality scores per node and default rate by score decile
    Centrality(CentralityArgs),
    /// Community membership per node and default rate per community
    Communities(CommunityArgs),
    /// Feature matrix of one quarter, labelled with next-quarter outcomes when known
    Features(FeatureArgs),
    /// Train a model on one quarter's features and the next quarter's outcomes
    Train(TrainArgs),
    /// Score one quarter with a trained model
    Predict(PredictArgs),
    /// Rolling quarterly evaluation of every feature ablation
    Rolling(RollingArgs),
    /// Run the built-in oracle suites
    Selftest,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Number of firms
    #[arg(long, default_value_t = SynthConfig::default().n_customers)]
    n_customers: usize,
    /// Length of the timeline in months
    #[arg(long, default_value_t = SynthConfig::default().n_months)]
    n_months: u32,
    /// First month of the timeline (YYYY-MM)
    #[arg(long, default_value = "2012-01")]
    start_month: String,
    /// Repayment-level default rate the hazard intercept is calibrated to
    #[arg(long, default_value_t = SynthConfig::default().target_default_rate)]
    target_default_rate: f64,
    /// Bring guarantee relations into use gradually instead of all at once
    #[arg(long, value_name = "BOOL", action = ArgAction::Set, default_value_t = SynthConfig::default().network_growth)]
    network_growth: bool,
    /// Target community size inside large components
    #[arg(long, default_value_t = SynthConfig::default().community_size)]
    community_size: usize,
}

#[derive(Debug, Args)]
struct AsOfArgs {
    /// Snapshot date (YYYY-MM-DD) [default: last day of the final quarter with repayments due]
    #[arg(long, value_name = "DATE")]
    as_of: Option<NaiveDate>,
}

#[derive(Debug, Args)]
struct CentralityArgs {
    #[command(flatten)]
    as_of: AsOfArgs,
    /// Score only the largest component
    #[arg(long, value_name = "BOOL", action = ArgAction::Set, default_value_t = false)]
    largest_only: bool,
}

#[derive(Debug, Args)]
struct CommunityArgs {
    #[command(flatten)]
    as_of: AsOfArgs,
    #[command(flatten)]
    snapshot: SnapshotArgs,
}

#[derive(Debug, Args)]
struct SnapshotArgs {
    /// Community detection method (edge_betweenness, label_propagation)
    #[arg(long, default_value_t = SnapshotOptions::default().method)]
    community_method: Method,
    /// Stop splitting a component once it has this many communities
    #[arg(long, default_value_t = SnapshotOptions::default().max_communities)]
    max_communities: usize,
}

#[derive(Debug, Args)]
struct BoostArgs {
    /// Boosting rounds
    #[arg(long, default_value_t = TrainParams::default().rounds)]
    rounds: usize,
    /// Shrinkage per tree
    #[arg(long, default_value_t = TrainParams::default().eta)]
    eta: f64,
    /// Maximum tree depth
    #[arg(long, default_value_t = TrainParams::default().max_depth)]
    max_depth: usize,
    /// Penalty per leaf
    #[arg(long, default_value_t = TrainParams::default().gamma)]
    gamma: f64,
    /// L2 penalty on leaf weights
    #[arg(long, default_value_t = TrainParams::default().lambda)]
    lambda: f64,
    /// Minimum hessian sum in a child
    #[arg(long, default_value_t = TrainParams::default().min_child_hessian)]
    min_child_hessian: f64,
}

#[derive(Debug, Args)]
struct FeatureArgs {
    /// Feature quarter (e.g. 2013Q1)
    #[arg(long)]
    quarter: Quarter,
    #[command(flatten)]
    snapshot: SnapshotArgs,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Feature quarter; labels come from the following quarter
    #[arg(long)]
    quarter: Quarter,
    /// Feature subset (NW, NW+CM, NW+N, H)
    #[arg(long, default_value_t = Ablation::Hybrid)]
    ablation: Ablation,
    #[command(flatten)]
    snapshot: SnapshotArgs,
    #[command(flatten)]
    boost: BoostArgs,
}

#[derive(Debug, Args)]
struct PredictArgs {
    /// Model document written by `train`
    #[arg(long, value_name = "FILE")]
    model: PathBuf,
    /// Feature quarter to score; outcomes come from the following quarter when present
    #[arg(long)]
    quarter: Quarter,
    /// Probability at or above which an instance counts as flagged
    #[arg(long, default_value_t = RollingConfig::default().recall_threshold)]
    recall_threshold: f64,
    #[command(flatten)]
    snapshot: SnapshotArgs,
}

#[derive(Debug, Args)]
struct RollingArgs {
    /// Training quarter of the first window
    #[arg(long, default_value_t = RollingConfig::default().start)]
    start: Quarter,
    /// Number of windows
    #[arg(long, default_value_t = RollingConfig::default().n_windows)]
    windows: usize,
    /// Comma-separated feature subsets to compare
    #[arg(long, default_value = "NW,NW+CM,NW+N,H")]
    ablations: String,
    /// Probability at or above which an instance counts as flagged
    #[arg(long, default_value_t = RollingConfig::default().recall_threshold)]
    recall_threshold: f64,
    #[command(flatten)]
    snapshot: SnapshotArgs,
    #[command(flatten)]
    boost: BoostArgs,
}

/// Subcommand flags that were typed on the command line, as configuration
/// key/value pairs. Flag ids equal configuration keys.
fn explicit(m: &ArgMatches, pairs: &[(&'static str, String)]) -> Vec<(&'static str, String)> {
    pairs
        .iter()
        .filter(|(id, _)| m.value_source(id) == Some(ValueSource::CommandLine))
        .cloned()
        .collect()
}

impl SnapshotArgs {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        vec![
            ("community_method", self.community_method.to_string()),
            ("max_communities", self.max_communities.to_string()),
        ]
    }
}

impl BoostArgs {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        vec![
            ("rounds", self.rounds.to_string()),
            ("eta", self.eta.to_string()),
            ("max_depth", self.max_depth.to_string()),
            ("gamma", self.gamma.to_string()),
            ("lambda", self.lambda.to_string()),
            ("min_child_hessian", self.min_child_hessian.to_string()),
        ]
    }
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Synth(_) => "synth",
            Command::Stats => "stats",
            Command::Graph(_) => "graph",
            Command::Centrality(_) => "centrality",
            Command::Communities(_) => "communities",
            Command::Features(_) => "features",
            Command::Train(_) => "train",
            Command::Predict(_) => "predict",
            Command::Rolling(_) => "rolling",
            Command::Selftest => "selftest",
        }
    }

    /// Configuration keys set by flags of this subcommand.
    fn flag_settings(&self, m: &ArgMatches) -> Vec<(&'static str, String)> {
        let pairs = match self {
            Command::Synth(a) => vec![
                ("n_customers", a.n_customers.to_string()),
                ("n_months", a.n_months.to_string()),
                ("start_month", a.start_month.clone()),
                ("target_default_rate", a.target_default_rate.to_string()),
                ("network_growth", a.network_growth.to_string()),
                ("community_size", a.community_size.to_string()),
            ],
            Command::Communities(a) => a.snapshot.pairs(),
            Command::Features(a) => a.snapshot.pairs(),
            Command::Train(a) => [a.snapshot.pairs(), a.boost.pairs()].concat(),
            Command::Predict(a) => {
                let mut v = a.snapshot.pairs();
                v.push(("recall_threshold", a.recall_threshold.to_string()));
                v
            }
            Command::Rolling(a) => {
                let mut v = vec![
                    ("start", a.start.to_string()),
                    ("windows", a.windows.to_string()),
                    ("ablations", a.ablations.clone()),
                    ("recall_threshold", a.recall_threshold.to_string()),
                ];
                v.extend(a.snapshot.pairs());
                v.extend(a.boost.pairs());
                v
            }
            Command::Stats | Command::Graph(_) | Command::Centrality(_) | Command::Selftest => {
                Vec::new()
            }
        };
        explicit(m, &pairs)
    }
}

fn main() -> ExitCode {
    let matches = match Cli::command().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match commands::run(&cli, &matches) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
