//! `msd`: extract features from a recording manifest, run the repeated
//! nested cross-validation, and compare automatic with perceptual
//! classification.

mod commands;
mod config;
mod logging;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand};

/// Exit status classes. Anything not listed is 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Other = 1,
    Usage = 2,
    Data = 3,
    Convergence = 4,
}

#[derive(Debug)]
pub struct Failure {
    pub exit: Exit,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn new(exit: Exit, error: impl Into<anyhow::Error>) -> Self {
        Self {
            exit,
            error: error.into(),
        }
    }

    pub fn usage(msg: impl std::fmt::Display) -> Self {
        Self::new(Exit::Usage, anyhow::anyhow!("{msg}"))
    }
}

impl From<msd_core::Error> for Failure {
    fn from(e: msd_core::Error) -> Self {
        use msd_core::error::EvalError;
        let exit = if e.is_convergence() {
            Exit::Convergence
        } else {
            match &e {
                msd_core::Error::Eval(
                    EvalError::NoScheme | EvalError::EmptyGrid | EvalError::Config(_),
                ) => Exit::Usage,
                _ => Exit::Data,
            }
        };
        Self::new(exit, e)
    }
}

/// I/O on output files and similar environment failures.
impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Self {
            exit: Exit::Other,
            error,
        }
    }
}

pub type CmdResult = Result<(), Failure>;

#[derive(Parser)]
#[command(
    name = "msd",
    version,
    about = "Motor speech disorder classification from acoustic features"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
pub struct Global {
    /// TOML configuration file; dotted keys such as `dsp.window_ms`.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Override one configuration value, e.g. `--set evaluation.repetitions=3`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Seed for fold assignment and synthetic cohorts (`evaluation.seed`).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long, short = 'j', global = true)]
    pub jobs: Option<usize>,
    /// More log output; repeat for debug messages.
    #[arg(long, short = 'v', global = true, action = ArgAction::Count)]
    pub verbose: u8,
    /// Errors only on the console.
    #[arg(long, short = 'q', global = true, conflicts_with = "verbose")]
    pub quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Extract the 28 features for every manifest entry.
    Extract(commands::ExtractArgs),
    /// Run the repeated nested cross-validation and write reports and final models.
    Evaluate(commands::EvaluateArgs),
    /// Score judge responses with the automatic metrics and add them to a report.
    Perceptual(commands::PerceptualArgs),
    /// Write a synthetic feature table.
    Synth(commands::SynthArgs),
    /// Describe a saved model artifact.
    InspectModel(commands::InspectArgs),
}

fn run(cli: Cli) -> CmdResult {
    let g = &cli.global;
    if let Some(jobs) = g.jobs {
        if jobs == 0 {
            return Err(Failure::usage("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Failure::new(Exit::Other, e))?;
    }
    let cfg = config::load(g.config.as_deref(), &g.overrides, g.seed)
        .map_err(|e| Failure::new(Exit::Usage, e))?;
    match cli.command {
        Command::Extract(a) => commands::extract(&a, &cfg),
        Command::Evaluate(a) => commands::evaluate(&a, &cfg),
        Command::Perceptual(a) => commands::perceptual(&a, &cfg),
        Command::Synth(a) => commands::synth(&a, &cfg),
        Command::InspectModel(a) => commands::inspect_model(&a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    logging::init(if cli.global.quiet {
        -1
    } else {
        cli.global.verbose.min(2) as i8
    });
    let result = run(cli);
    logging::flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.exit as u8)
        }
    }
}
