//! `depthrl`: synthesize scenes, score comfort, train and apply the
//! depth-adjustment agent, and compare it with the exact oracle.

mod commands;
mod manifest;
mod scenes;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "depthrl", version, about = "Comfort-aware stereoscopic depth adjustment")]
pub struct Cli {
    /// Run configuration (TOML); built-in defaults when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Seed for all randomness. Overrides the config's agent seed.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Suppress progress and informational output.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write synthetic scenes as 16-bit PGM files with quantization sidecars.
    Generate(GenerateArgs),
    /// Print comfort score, depth richness and features of one scene.
    Score(ScoreArgs),
    /// Train the Q-network on every scene in a directory.
    Train(TrainArgs),
    /// Run the trained policy on one scene and save the adjusted map.
    Adjust(AdjustArgs),
    /// Compare the policy with the grid-search oracle over a scene directory.
    Evaluate(EvaluateArgs),
    /// Fit a comfort model to labeled features by ridge regression.
    Fit(FitArgs),
    /// Print the configuration in effect (defaults unless --config is given).
    Config(ConfigArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Scene generator spec (TOML); built-in defaults when omitted.
    #[arg(long, value_name = "PATH")]
    pub spec: Option<PathBuf>,
    #[arg(long, default_value_t = 50)]
    pub count: usize,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    pub scene: PathBuf,
    /// Append one result row to this CSV file.
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
    /// Directory for the run manifest; printed to stderr otherwise.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    pub scenes: PathBuf,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Episodes between progress lines.
    #[arg(long, default_value_t = 100)]
    pub progress_every: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MapFormat {
    Csv,
    Pfm,
    Pgm,
}

#[derive(Debug, Args)]
pub struct AdjustArgs {
    pub scene: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// 8-bit PGM view to re-render at the chosen baseline.
    #[arg(long, value_name = "PATH")]
    pub image: Option<PathBuf>,
    /// File format of the adjusted disparity map.
    #[arg(long, value_enum, default_value_t = MapFormat::Csv)]
    pub format: MapFormat,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    pub scenes: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Calibration CSV: one column per feature followed by `mos`.
    pub samples: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    pub lambda: f64,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Print the built-in default configuration.
    #[arg(long)]
    pub print_default: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", commands::describe(&err));
            ExitCode::from(commands::exit_code(&err))
        }
    }
}
