//! `coadapt`: batch entry points for training, adaptation, learning and serving.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "coadapt", version, about = "Learn, adapt and refine movement primitives")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a movement-primitive model to demonstrations.
    Train(TrainArgs),
    /// Condition a model on a scenario's start and goal.
    Imitate(ImitateArgs),
    /// Adapt the imitation trajectory to a scenario.
    Adapt(AdaptArgs),
    /// Run the co-active learning loop against an oracle user.
    Learn(LearnArgs),
    /// Serve the HTTP API.
    Serve(ServeArgs),
    /// Export a loop log as CSV for plotting.
    Plotdata(PlotArgs),
}

#[derive(Args)]
pub struct TrainArgs {
    /// Demonstration set (JSON).
    #[arg(long, conflicts_with = "synthesize", required_unless_present = "synthesize")]
    pub demos: Option<PathBuf>,
    /// Generate this many random transfer demonstrations instead of reading a file.
    #[arg(long, value_name = "COUNT")]
    pub synthesize: Option<usize>,
    /// Seed for `--synthesize`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Steps per synthesized demonstration.
    #[arg(long, default_value_t = 80)]
    pub demo_steps: usize,
    /// Number of basis functions.
    #[arg(long, default_value_t = 10)]
    pub basis: usize,
    /// Also write the synthesized demonstrations here.
    #[arg(long)]
    pub save_demos: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct ImitateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub scenario: PathBuf,
    /// Number of steps T.
    #[arg(long, default_value_t = 50)]
    pub steps: usize,
    /// Observation noise on start and goal.
    #[arg(long, default_value_t = 1e-10)]
    pub noise: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct AdaptArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub scenario: PathBuf,
    /// Reward weights (JSON); the initial weights when omitted.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// Loop configuration (JSON).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct LearnArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Scenario files, visited in turn.
    #[arg(long, required = true, num_args = 1..)]
    pub scenario: Vec<PathBuf>,
    /// Oracle user configuration (JSON).
    #[arg(long)]
    pub oracle: PathBuf,
    #[arg(long)]
    pub iterations: usize,
    /// Initial reward weights (JSON).
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// Loop configuration (JSON).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Where to write the final weights.
    #[arg(long)]
    pub weights_out: Option<PathBuf>,
    /// Loop log (JSON).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub bind: String,
    #[arg(long)]
    pub snapshot_dir: Option<PathBuf>,
    /// Built UI bundle to host under `/`.
    #[arg(long)]
    pub static_dir: Option<PathBuf>,
}

#[derive(Args)]
pub struct PlotArgs {
    /// Loop log written by `learn`.
    pub log: PathBuf,
    /// Output directory for the CSV files.
    #[arg(long)]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(a) => commands::train(&a),
        Command::Imitate(a) => commands::imitate(&a),
        Command::Adapt(a) => commands::adapt(&a),
        Command::Learn(a) => commands::learn(&a),
        Command::Serve(a) => commands::serve(&a),
        Command::Plotdata(a) => commands::plotdata(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
