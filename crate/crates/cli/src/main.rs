//! `oslab`: run positivity certificates, reconstructions and Lie-algebra
//! checks from the command line.
//!
//! Exit codes: 0 all checks pass, 1 a mathematical check failed, 2 usage or
//! configuration error.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::{Overrides, Settings};
use crate::report::{status, OutDir};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config, file access or out-of-range parameters.
    Usage(String),
    /// A construction was refused on mathematical grounds.
    Math(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) => 2,
            Self::Math(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Usage(m) => write!(f, "error: {m}"),
            Self::Math(m) => write!(f, "check failed: {m}"),
        }
    }
}

impl From<oslab_core::Error> for CliError {
    fn from(e: oslab_core::Error) -> Self {
        use oslab_core::Error as E;
        match e {
            E::NotPsd { .. }
            | E::NotHermitian { .. }
            | E::RpViolation { .. }
            | E::DegenerateSpace
            | E::NonPositiveTransfer(_)
            | E::InvalidAlgebra(_)
            | E::InvalidInvolution(_)
            | E::Cone(_) => Self::Math(e.to_string()),
            E::Domain(_)
            | E::Dimension { .. }
            | E::LatticeMismatch
            | E::Precondition(_)
            | E::Range { .. }
            | E::UnknownExample(_)
            | E::Parse(_) => Self::Usage(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "oslab", version, about = "Reflection positivity, reconstruction and c-duality checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// TOML run configuration; flags override its values.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Seed for every random stream.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Monte-Carlo sample count.
    #[arg(long, value_name = "N")]
    samples: Option<usize>,
    /// Output directory [default: $OSLAB_OUT_DIR, else ./oslab-out].
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Tolerance of the command's primary check.
    #[arg(long, value_name = "X")]
    tolerance: Option<f64>,
    /// Print nothing on success.
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Positive-definiteness and reflection-positivity certificates.
    RpCheck(Common),
    /// Physical Hilbert space, Hamiltonian spectrum, contraction and n-point tables.
    Reconstruct(Common),
    /// Three-way n-point comparison table.
    Npoint(Common),
    /// c-dual of a Lie algebra with involution.
    Cdual {
        /// Built-in example or path to an example file; overrides `example` in the config.
        example: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Hyperbolicity and invariance checks on a cone in q.
    ConeCheck {
        example: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Every acceptance check, summarized in one table.
    Suite(Common),
}

fn run(cli: Cli) -> Result<(bool, bool, Vec<String>), CliError> {
    let (common, example) = match &cli.command {
        Command::RpCheck(c) | Command::Reconstruct(c) | Command::Npoint(c) | Command::Suite(c) => (c.clone(), None),
        Command::Cdual { example, common } | Command::ConeCheck { example, common } => (common.clone(), example.clone()),
    };
    let mut file = config::load(common.config.as_deref())?;
    if let Some(e) = example {
        file.example = Some(e);
    }
    let flags = Overrides {
        seed: common.seed,
        samples: common.samples,
        out: common.out.clone(),
        tolerance: common.tolerance,
    };
    let settings = Settings::resolve(&file, &flags)?;
    let mut out = OutDir::create(&settings.out_dir)?;
    let outcome = match cli.command {
        Command::RpCheck(_) => commands::rp_check(&settings, &mut out)?,
        Command::Reconstruct(_) => commands::reconstruct(&settings, &mut out)?,
        Command::Npoint(_) => commands::npoint(&settings, &mut out)?,
        Command::Cdual { .. } => commands::cdual(&settings, &mut out)?,
        Command::ConeCheck { .. } => commands::cone_check(&settings, &mut out)?,
        Command::Suite(_) => {
            let source = settings.describe_source(common.config.as_deref());
            commands::suite_run(&settings, &source, &mut out)?
        }
    };
    let mut lines = outcome.lines;
    lines.push(format!(
        "{}: {} file(s) in {}",
        status(outcome.passed),
        out.written().len(),
        settings.out_dir.display()
    ));
    Ok((outcome.passed, common.quiet, lines))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((passed, quiet, lines)) => {
            if !(quiet && passed) {
                for l in &lines {
                    println!("{l}");
                }
            }
            ExitCode::from(if passed { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
