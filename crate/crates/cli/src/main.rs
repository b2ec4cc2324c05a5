//! `assim`: command-line front end for assimilation scoring.
//!
//! Exit codes: 0 success, 1 provider failure, 2 input or configuration error,
//! 3 degenerate method outcome (nothing distinctive to score). Failures print a
//! single `ErrorCode: message` line on stderr.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use assim_core::synth::Role;
use assim_core::Error;
use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "assim",
    version,
    about = "Interest-based assimilation scores from audience estimates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Score a target population against a destination and home population.
    Score(ScoreArgs),
    /// Re-score random interest subsets of increasing size.
    Robustness(RobustnessArgs),
    /// Correlate two per-region series.
    Validate(ValidateArgs),
    /// Generate a synthetic triple with known ground truth.
    Synth(SynthArgs),
    /// Fetch an audience table from a provider.
    Fetch(FetchArgs),
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// JSON config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub dest: Option<PathBuf>,
    #[arg(long)]
    pub target: Option<PathBuf>,
    #[arg(long)]
    pub home: Option<PathBuf>,
    /// Percentage of distinctive interests kept for scoring [default: 50].
    #[arg(long)]
    pub k: Option<f64>,
    /// Clip per-interest scores to this value before aggregating.
    #[arg(long)]
    pub cap: Option<f64>,
    /// Report path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RobustnessArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub dest: Option<PathBuf>,
    #[arg(long)]
    pub target: Option<PathBuf>,
    #[arg(long)]
    pub home: Option<PathBuf>,
    #[arg(long)]
    pub k: Option<f64>,
    /// Subset sizes as start:stop:step (stop inclusive) [default: 100:2900:100].
    #[arg(long)]
    pub sizes: Option<String>,
    /// Trials per size [default: 1].
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Smallest size included in the relative-change statistics [default: 500].
    #[arg(long)]
    pub floor: Option<usize>,
    /// CSV of size,trial,median_score; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Summary JSON path; printed to stdout when omitted and --out is given.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub a: Option<PathBuf>,
    #[arg(long)]
    pub b: Option<PathBuf>,
    /// Divide values by area_km2 before correlating.
    #[arg(long)]
    pub per_area: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Number of interests [default: 2907].
    #[arg(long)]
    pub interests: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub k: Option<f64>,
    #[arg(long)]
    pub dest_total: Option<u64>,
    #[arg(long)]
    pub home_total: Option<u64>,
    #[arg(long)]
    pub target_total: Option<u64>,
    /// Symmetric Dirichlet concentration [default: 1].
    #[arg(long)]
    pub concentration: Option<f64>,
    #[arg(long)]
    pub activity_scale: Option<f64>,
    #[arg(long, value_parser = parse_role)]
    pub activity_population: Option<Role>,
}

#[derive(Debug, Args)]
pub struct FetchArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// JSON file holding the population description.
    #[arg(long)]
    pub population: Option<PathBuf>,
    /// CSV with `interest_id,interest_name` columns.
    #[arg(long)]
    pub interests: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides ASSIM_PROVIDER_URL and the config file.
    #[arg(long)]
    pub base_url: Option<String>,
    #[arg(long)]
    pub max_requests: Option<u32>,
    /// Rate window in seconds.
    #[arg(long)]
    pub window: Option<f64>,
    #[arg(long)]
    pub retries: Option<u32>,
    /// Cache lifetime in seconds.
    #[arg(long)]
    pub cache_ttl: Option<f64>,
}

fn parse_role(s: &str) -> Result<Role, String> {
    match s {
        "dest" => Ok(Role::Dest),
        "home" => Ok(Role::Home),
        "target" => Ok(Role::Target),
        other => Err(format!(
            "unknown population `{other}` (dest, home or target)"
        )),
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::NoDistinctiveInterests | Error::EmptyScores | Error::DegenerateDraw(_) => 3,
        Error::ProviderUnavailable { .. } | Error::ContractViolation(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.to_string();
            let line = message
                .lines()
                .next()
                .unwrap_or_default()
                .trim_start_matches("error: ");
            eprintln!("UsageError: {line}");
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::Score(args) => commands::score(args),
        Command::Robustness(args) => commands::robustness(args),
        Command::Validate(args) => commands::validate(args),
        Command::Synth(args) => commands::synth(args),
        Command::Fetch(args) => commands::fetch(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let message = err.to_string().replace('\n', " ");
            eprintln!("{}: {message}", err.code());
            ExitCode::from(exit_code(&err))
        }
    }
}
