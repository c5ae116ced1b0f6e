mod commands;
mod config;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use ilc_core::evaluation::Adversarial;
use ilc_core::rules::PruneStrategy;

/// Lossless 2-D graphs of n-D data, pure box discovery and box rules.
#[derive(Debug, Parser)]
#[command(name = "ilc", version)]
pub struct Cli {
    /// TOML file supplying flag values; flags on the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encode a CSV dataset into a graph dump.
    Map {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        mapping: MappingArgs,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Discover pure boxes and write the trace and rules.
    Discover {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        discovery: DiscoveryArgs,
        /// Rules file to write.
        #[arg(long)]
        rules_out: PathBuf,
        #[arg(long)]
        trace_out: Option<PathBuf>,
        /// Drop negations that exclude nothing on the training cases.
        #[arg(long)]
        simplify: bool,
    },
    /// Apply a rules file and report metrics.
    Classify {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        rules: PathBuf,
        /// Predictions file to write, one JSON record per case.
        #[arg(long, short)]
        out: Option<PathBuf>,
        /// Metrics as JSON.
        #[arg(long)]
        metrics_out: Option<PathBuf>,
    },
    /// Join rules without changing any prediction on the given cases.
    Join {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        rules: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Reassign or refuse rules that decide few cases.
    Prune {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        rules: PathBuf,
        #[arg(long, default_value = "reassign")]
        strategy: PruneStrategy,
        /// Prune rules deciding at most this many cases.
        #[arg(long, default_value_t = 7)]
        tau: usize,
        /// Prune this rule only.
        #[arg(long)]
        rule: Option<String>,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Cross-validate discovery and rule building.
    Cv {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        mapping: MappingArgs,
        #[command(flatten)]
        discovery: DiscoveryArgs,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
        stratified: bool,
        #[arg(long, default_value = "none")]
        adversarial: Adversarial,
        #[arg(long, default_value_t = 0)]
        designated_fold: usize,
        /// Prune each fold's rules with this strategy.
        #[arg(long)]
        prune: Option<PruneStrategy>,
        #[arg(long, default_value_t = 7)]
        tau: usize,
        /// Report file; stdout when absent.
        #[arg(long, short)]
        out: Option<PathBuf>,
        /// Write the report as JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Draw the dataset as SVG, optionally with the boxes of a rules file.
    Render {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        mapping: MappingArgs,
        #[arg(long)]
        rules: Option<PathBuf>,
        /// Draw odd-indexed classes below the axis.
        #[arg(long)]
        mirrored: bool,
        #[arg(long, default_value_t = 800.0)]
        width: f64,
        #[arg(long, default_value_t = 600.0)]
        height: f64,
        /// Draw at most this many cases.
        #[arg(long)]
        limit: Option<usize>,
        #[arg(long, default_value_t = 0.5)]
        arc_height: f64,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Fit a projection-line model for one class.
    Linear {
        #[command(flatten)]
        input: InputArgs,
        /// Target class name.
        #[arg(long)]
        target: String,
        #[arg(long, default_value_t = 180)]
        angles: usize,
        /// Comma-separated nodes to search: `endpoint` or zero-based indices.
        #[arg(long, default_value = "endpoint", value_delimiter = ',')]
        node: Vec<String>,
        #[arg(long, default_value = "two-sided")]
        threshold_mode: String,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: std::net::SocketAddr,
        /// Dataset for sessions created without one.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        preset: Option<Preset>,
        #[arg(long)]
        label_column: Option<String>,
        #[arg(long)]
        id_column: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    /// Header row, `class` labels, nothing dropped.
    Plain,
    /// UCI breast-cancer-wisconsin layout: id column, labels 2/4.
    Wbc,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// CSV file with a header row.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "plain")]
    pub preset: Preset,
    #[arg(long)]
    pub label_column: Option<String>,
    #[arg(long)]
    pub id_column: Option<String>,
}

#[derive(Debug, Args)]
pub struct MappingArgs {
    /// static, partial-dynamic, full-dynamic, weighted, sequential, collocated, generic
    #[arg(long, default_value = "partial-dynamic")]
    pub mode: String,
    /// Comma-separated per-coordinate weights for `weighted`.
    #[arg(long)]
    pub weights: Option<String>,
    /// Comma-separated baseline offsets for `sequential` and `generic`.
    #[arg(long)]
    pub offsets: Option<String>,
    /// Offset step for `sequential` when no offsets are given.
    #[arg(long, default_value_t = 10.0)]
    pub spacing: f64,
}

/// Cases from a CSV file or from a graph dump.
#[derive(Debug, Args)]
pub struct InputArgs {
    /// CSV file with a header row.
    #[arg(long, required_unless_present = "graphs")]
    pub data: Option<PathBuf>,
    /// Graph dump written by `map`; takes precedence over `--data`.
    #[arg(long)]
    pub graphs: Option<PathBuf>,
    #[arg(long, default_value = "plain")]
    pub preset: Preset,
    #[arg(long)]
    pub label_column: Option<String>,
    #[arg(long)]
    pub id_column: Option<String>,
    #[command(flatten)]
    pub mapping: MappingArgs,
}

#[derive(Debug, Args)]
pub struct DiscoveryArgs {
    #[arg(long)]
    pub pitch: Option<f64>,
    #[arg(long)]
    pub max_box_cells_x: Option<usize>,
    #[arg(long)]
    pub max_box_cells_y: Option<usize>,
    /// Smallest support of a box taken while classes alternate.
    #[arg(long)]
    pub min_pure_support: Option<usize>,
    #[arg(long)]
    pub mini_threshold: Option<usize>,
}

/// A flag problem found after clap parsing.
#[derive(Debug)]
pub struct BadFlag(pub String);

impl std::fmt::Display for BadFlag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for BadFlag {}

fn command() -> clap::Command {
    let mut cmd = Cli::command();
    let names: Vec<String> = cmd.get_subcommands().map(|c| c.get_name().to_string()).collect();
    for name in names {
        cmd = cmd.mut_subcommand(name, |c| c.args_override_self(true));
    }
    cmd
}

/// Config path and subcommand position, found without full parsing so
/// required flags may come from the config file.
fn prescan(argv: &[OsString], cmd: &clap::Command) -> (Option<PathBuf>, Option<usize>) {
    let mut config = None;
    let mut sub = None;
    let mut i = 1;
    while i < argv.len() {
        let a = argv[i].to_string_lossy();
        if a == "--config" {
            config = argv.get(i + 1).map(PathBuf::from);
            i += 2;
            continue;
        }
        if let Some(v) = a.strip_prefix("--config=") {
            config = Some(PathBuf::from(v));
        } else if sub.is_none() && cmd.find_subcommand(a.as_ref()).is_some() {
            sub = Some(i);
        }
        i += 1;
    }
    (config, sub)
}

/// Parses `argv`, splicing in config-file tokens right after the
/// subcommand name.
fn parse(argv: Vec<OsString>) -> Result<Cli, anyhow::Error> {
    let root = command();
    let argv = match prescan(&argv, &root) {
        (Some(path), Some(pos)) => {
            let name = argv[pos].to_string_lossy().into_owned();
            let sub = root.find_subcommand(&name).expect("known subcommand");
            let extra = config::tokens(&path, sub)?;
            let mut spliced = argv[..=pos].to_vec();
            spliced.extend(extra.into_iter().map(OsString::from));
            spliced.extend_from_slice(&argv[pos + 1..]);
            spliced
        }
        _ => argv,
    };
    Ok(Cli::from_arg_matches(&command().try_get_matches_from(argv)?)?)
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.downcast_ref::<std::io::Error>()
        .is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
}

/// The error chain, skipping causes already spelled out by their parent.
fn describe(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if !out.contains(&text) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&text);
        }
    }
    out
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<BadFlag>().is_some() {
        return 2;
    }
    match e.downcast_ref::<ilc_core::Error>() {
        Some(ilc_core::Error::Config(_)) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("ILC_LOG", "warn")).init();
    let cli = match parse(std::env::args_os().collect()) {
        Ok(cli) => cli,
        Err(e) => {
            if let Some(ce) = e.downcast_ref::<clap::Error>() {
                ce.exit();
            }
            eprintln!("error: {}", describe(&e));
            return ExitCode::from(exit_code(&e));
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}
