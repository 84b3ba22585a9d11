//! Argument parsing and dispatch behind the `dampwave` binary.

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::{self, OdeFixture, Outcome, PictureArg};
use crate::verify::Fault;
use crate::{CliResult, Overrides, Settings};

#[derive(Parser)]
#[command(name = "dampwave", version, about = "Blow-up laboratory for u_tt - Δu + μ/(1+t) u_t = |u|^p")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Flat TOML file; flags override its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Subcommand)]
enum Command {
    /// Critical exponents and regime constants.
    Exponents {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        p: Option<f64>,
    },
    /// Blow-up time of the comparison ODE, or a δ sweep with --deltas.
    OdeBlowup {
        #[arg(long, value_enum, default_value = "envelope")]
        fixture: OdeFixture,
        #[command(flatten)]
        common: Common,
    },
    /// One radial run of the damped or transformed equation.
    Solve {
        #[arg(long, value_enum, default_value = "damped")]
        picture: PictureArg,
        #[command(flatten)]
        common: Common,
    },
    /// Lifespans over ε and the log-log fit.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Damped solution against the pullback of the transformed one.
    TransformCheck {
        #[command(flatten)]
        common: Common,
    },
    /// Invariant suite.
    Verify {
        /// Inject a known defect to confirm the suite notices.
        #[arg(long, value_enum)]
        seed_fault: Option<Fault>,
        #[command(flatten)]
        common: Common,
    },
}

fn settings(common: &Common, t_max_default: f64) -> CliResult<Settings> {
    let o = Overrides::load(common.config.as_deref(), common.overrides.clone())?;
    Settings::resolve(&o, t_max_default)
}

fn finish(outcome: Outcome, s: &Settings) -> CliResult<()> {
    let report = outcome.persist(&s.output_dir)?;
    for c in &report.checks {
        println!("{} {} = {:e} ({})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.measured, c.limit);
    }
    println!("report written to {}", s.output_dir.join("report.json").display());
    report.verdict()
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Exponents { n, mu, p } => {
            print!("{}", commands::exponents(n, mu, p)?);
            Ok(())
        }
        Command::OdeBlowup { fixture, common } => {
            let s = settings(&common, 50.0)?;
            finish(commands::ode_blowup(&s, fixture)?, &s)
        }
        Command::Solve { picture, common } => {
            let s = settings(&common, 50.0)?;
            finish(commands::solve(&s, picture)?, &s)
        }
        Command::Sweep { common } => {
            let s = settings(&common, 300.0)?;
            finish(commands::sweep(&s)?, &s)
        }
        Command::TransformCheck { common } => {
            let s = settings(&common, 50.0)?;
            finish(commands::transform_check(&s)?, &s)
        }
        Command::Verify { seed_fault, common } => {
            let s = settings(&common, 50.0)?;
            finish(commands::verify(seed_fault)?, &s)
        }
    }
}

/// Parses `args` (program name first), runs the command and maps the
/// outcome to the process exit code. Usage errors exit through clap.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match dispatch(Cli::parse_from(args)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dampwave: {e}");
            e.exit_code()
        }
    }
}
