//! `layoutforge`: generate synthetic rooms, evaluate layout predictions,
//! build grouped reports, augment feature sequences and render depth maps.

mod augment;
mod common;
mod eval;
mod gen;
mod render;
mod report;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use layoutforge::imbalance::{Grouping, DEFAULT_ANGLE_TOL};
use layoutforge::objectives::LossWeights;

use common::{parse_resolution, CliError, CliResult, EXIT_INTERNAL};

#[derive(Debug, Parser)]
#[command(
    name = "layoutforge",
    version,
    about = "Room-layout geometry, augmentation and evaluation toolkit"
)]
pub struct Cli {
    /// Number of longitude samples N.
    #[arg(long = "n", global = true, default_value_t = 256)]
    pub n: usize,

    /// Depth-map resolution as HxW with W = 2H.
    #[arg(long, global = true, default_value = "512x1024", value_parser = parse_resolution)]
    pub resolution: (usize, usize),

    /// Root seed for every random draw of the run.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Weight of the AVG term in the overall objective.
    #[arg(long, global = true, default_value_t = 0.1)]
    pub alpha: f64,

    /// Weight of the CSMix term in the overall objective.
    #[arg(long, global = true, default_value_t = 0.01)]
    pub beta: f64,

    /// Grouping dimension for `report`; `eval` always writes all three.
    #[arg(long, global = true, default_value = "corners", value_parser = parse_grouping)]
    pub grouping: Grouping,

    /// Reject unknown JSON keys instead of warning.
    #[arg(long, global = true)]
    pub strict: bool,

    /// Continue past failing files and report them at the end.
    #[arg(long, global = true)]
    pub keep_going: bool,

    /// Compute RMSE and δ₁ on horizon depths instead of rendered maps.
    #[arg(long, global = true)]
    pub horizon_only: bool,

    /// Angular tolerance of the Manhattan tests, radians.
    #[arg(long, global = true, default_value_t = DEFAULT_ANGLE_TOL)]
    pub angle_tol: f64,

    #[command(subcommand)]
    pub command: Command,
}

fn parse_grouping(s: &str) -> Result<Grouping, String> {
    s.parse().map_err(|e: layoutforge::Error| e.to_string())
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate synthetic rooms with ground-truth labels.
    Gen(gen::GenArgs),
    /// Score predictions against annotations.
    Eval(eval::EvalArgs),
    /// Group a metrics CSV along one dimension.
    Report(report::ReportArgs),
    /// Apply AVG restyling or CSMix splicing to feature sequences.
    Augment(augment::AugmentArgs),
    /// Render the equirectangular depth map of a room.
    RenderDepth(render::RenderArgs),
}

impl Cli {
    pub fn weights(&self) -> CliResult<LossWeights> {
        Ok(LossWeights::new(self.alpha, self.beta)?)
    }

    pub fn seed_or_default(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn check_n(&self) -> CliResult<()> {
        if self.n < 2 {
            return Err(CliError::usage(format!("--n must be at least 2, got {}", self.n)));
        }
        Ok(())
    }
}

fn init_threads() -> CliResult<()> {
    let Ok(value) = std::env::var("LAYOUTFORGE_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::usage(format!("LAYOUTFORGE_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::new(EXIT_INTERNAL, e.to_string()))
}

fn run(cli: &Cli) -> CliResult<()> {
    init_threads()?;
    cli.check_n()?;
    match &cli.command {
        Command::Gen(args) => gen::run(cli, args),
        Command::Eval(args) => eval::run(cli, args),
        Command::Report(args) => report::run(cli, args),
        Command::Augment(args) => augment::run(cli, args),
        Command::RenderDepth(args) => render::run(cli, args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(common::EXIT_PARSE as u8);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code as u8)
        }
    }
}
