use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nuds::commands::{self, DemoOutput, Mode};
use nuds::CliError;

#[derive(Parser)]
#[command(name = "nuds", version, about = "Simulate non-uniform discrete dynamical systems and recover their source term")]
struct Cli {
    /// Override a tolerance, e.g. `--tol-override bs=1e-8`. Repeatable.
    #[arg(long = "tol-override", value_name = "KEY=VAL", global = true)]
    tol_override: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArg {
    /// Path to the JSON config.
    #[arg(value_name = "CONFIG")]
    path: Option<PathBuf>,
    #[arg(long = "config", value_name = "CONFIG", conflicts_with = "path")]
    flag: Option<PathBuf>,
}

impl ConfigArg {
    fn resolve(self) -> Result<PathBuf, CliError> {
        self.path
            .or(self.flag)
            .ok_or_else(|| CliError::Config("no config given (pass CONFIG or --config)".into()))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Finite,
    Infinite,
}

#[derive(Subcommand)]
enum Command {
    /// Write the trajectory and data matrix as CSV.
    Simulate {
        #[command(flatten)]
        config: ConfigArg,
        /// Output directory.
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Recover the source term and write a JSON report.
    Recover {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long, value_enum, default_value = "finite")]
        mode: ModeArg,
        /// Row used by finite recovery, as a label such as `0`, `r/N` or `-2+r/N`.
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        at: String,
        /// Rows taken at each end of the window by infinite recovery.
        #[arg(long, default_value_t = 2)]
        tail: usize,
        /// Report file, or directory for `report.json`. Defaults to stdout.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Print frame bounds, recoverability conditions and convergence diagnostics.
    Check {
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Build a worked example, run its recovery and check the expected outcome.
    Demo {
        /// Scenario id.
        id: String,
        #[arg(short = 'K')]
        k: Option<usize>,
        #[arg(long = "N", default_value_t = 2)]
        n: u32,
        #[arg(long, default_value_t = 1)]
        r: u32,
        /// Report (or config) file, or a directory. Defaults to stdout.
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Write the scenario as a config instead of running it.
        #[arg(long)]
        emit_config: bool,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let overrides = &cli.tol_override;
    match cli.command {
        Command::Simulate { config, out } => {
            let written = commands::simulate(&config.resolve()?, overrides, &out)?;
            eprintln!(
                "wrote {} states to {} and {}",
                written.rows,
                written.trajectory.display(),
                written.data.display()
            );
        }
        Command::Recover { config, mode, at, tail, out } => {
            let mode = match mode {
                ModeArg::Finite => Mode::Finite,
                ModeArg::Infinite => Mode::Infinite,
            };
            let report = commands::recover(&config.resolve()?, overrides, mode, &at, tail, out.as_deref())?;
            if let Some(err) = report.abs_error {
                eprintln!("recovered w with ||w_hat - w|| = {err:e}");
            }
        }
        Command::Check { config } => {
            let rows = commands::check(&config.resolve()?, overrides)?;
            commands::print_stdout(&commands::format_table(&rows))?;
        }
        Command::Demo { id, k, n, r, out, emit_config } => {
            match commands::demo(&id, k, (n, r), overrides, emit_config, out.as_deref())? {
                DemoOutput::Config(_) => {}
                DemoOutput::Report(report) => {
                    for c in &report.checks {
                        eprintln!("[{}] {}: {}", if c.passed { "ok" } else { "FAIL" }, c.name, c.detail);
                    }
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
