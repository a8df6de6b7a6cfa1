use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

use commands::Failure;

/// Knowledge-tracing benchmark: IRT, BKT, PFA, DKT and DKT-DSC under
/// student-level cross-validation.
#[derive(Debug, Parser)]
#[command(name = "ktbench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load and clean a raw export, write the canonical CSV.
    Ingest(IngestArgs),
    /// Cross-validate one or more models.
    Run(RunArgs),
    /// Cross-validate the group-conditioned model over an interval or cluster grid.
    Sweep(SweepArgs),
    /// Generate a synthetic dataset with planted ability groups.
    Synth(SynthArgs),
    /// Run the gradient checks and reference-implementation comparisons.
    Check(CheckArgs),
}

#[derive(Debug, Args)]
struct IngestArgs {
    #[arg(long)]
    data: PathBuf,
    /// assistments, kdd or canonical
    #[arg(long, default_value = "assistments")]
    format: String,
    /// Canonical CSV to write.
    #[arg(long)]
    out: PathBuf,
    /// How rows tagged with several skills are kept: joint or first.
    #[arg(long, default_value = "joint")]
    multiskill: String,
    /// Keep repeat attempts at the same item.
    #[arg(long)]
    keep_repeats: bool,
}

/// Settings shared by `run` and `sweep`. Flags override the config file.
#[derive(Debug, Args)]
struct ExperimentArgs {
    /// Flat key=value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
    /// Name used in reports; defaults to the data file stem.
    #[arg(long)]
    dataset: Option<String>,
    #[arg(long)]
    interval_len: Option<usize>,
    #[arg(long)]
    clusters: Option<usize>,
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    dropout: Option<f64>,
    /// Falls back to KTBENCH_SEED, then the config file.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    folds: Option<usize>,
    /// vanilla or gated
    #[arg(long)]
    cell: Option<String>,
    /// Score every model only where all of them predict.
    #[arg(long)]
    strict: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for folds and models.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    exp: ExperimentArgs,
    /// Comma-separated list of irt, bkt, pfa, dkt, dktdsc, or `all`.
    #[arg(long)]
    model: Option<String>,
    /// Compare against published full-scale results for the named dataset.
    #[arg(long)]
    full: bool,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    exp: ExperimentArgs,
    /// interval or clusters
    #[arg(long, value_parser = ["interval", "clusters"])]
    axis: String,
    /// `student,group` file; adds label agreement to the table.
    #[arg(long)]
    groups: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Directory for `synthetic.csv` and `groups.csv`.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 300)]
    students: usize,
    #[arg(long, default_value_t = 10)]
    skills: usize,
    #[arg(long, default_value_t = 100)]
    attempts: usize,
    #[arg(long, default_value_t = 17, env = "KTBENCH_SEED")]
    seed: u64,
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[arg(long, default_value_t = 0, env = "KTBENCH_SEED")]
    seed: u64,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ingest(a) => commands::ingest(a),
        Command::Run(a) => commands::run(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Synth(a) => commands::synth(a),
        Command::Check(a) => commands::check(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, message }) => {
            eprintln!("ktbench: {message}");
            ExitCode::from(code)
        }
    }
}
