mod commands;
mod json;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::CliError;

/// Minimum-error discrimination of qubit states.
#[derive(Debug, Parser)]
#[command(name = "minerr", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Constructive solver (equiprobable pure states, or any two states).
    Solve(SolveArgs),
    /// Numerical dual solve and POVM recovery for any ensemble.
    Oracle(OracleArgs),
    /// Certify a POVM against an ensemble.
    Verify(VerifyArgs),
    /// Monte Carlo of the measurement.
    Simulate(SimulateArgs),
    /// Enumerate the optimal POVMs sharing the solver's Lagrangian.
    Family(FamilyArgs),
    /// Bloch coordinates of the states and POVM elements as CSV.
    ExportBloch(ExportArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Ensemble document, or a report that echoes one.
    ensemble: PathBuf,
    /// Write the report here instead of standard output.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Certification tolerance (default 1e-9).
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    common: Common,
    /// Attach a comparison with the dual oracle.
    #[arg(long)]
    oracle_check: bool,
    /// Also simulate this many trials of the solution.
    #[arg(long)]
    trials: Option<u64>,
    /// Write the POVM alone to this file.
    #[arg(long)]
    povm_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    povm_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    /// POVM document, or a report carrying one.
    povm: PathBuf,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, conflicts_with = "use_solver", required_unless_present = "use_solver")]
    povm: Option<PathBuf>,
    /// Simulate the solver's POVM.
    #[arg(long)]
    use_solver: bool,
    #[arg(long, default_value_t = 1_000_000)]
    trials: u64,
    /// Write the empirical confusion matrix as CSV.
    #[arg(long)]
    confusion_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FamilyArgs {
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct ExportArgs {
    #[command(flatten)]
    common: Common,
    /// POVM to export; defaults to the solver's.
    #[arg(long)]
    povm: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Solve(a) => commands::solve(&a.common.into(), a.oracle_check, a.trials, a.povm_out.as_deref()),
        Command::Oracle(a) => commands::oracle(&a.common.into(), a.trials, a.povm_out.as_deref()),
        Command::Verify(a) => commands::verify(&a.common.into(), &a.povm),
        Command::Simulate(a) => commands::simulate(
            &a.common.into(),
            a.povm.as_deref(),
            a.trials,
            a.confusion_csv.as_deref(),
        ),
        Command::Family(a) => commands::family(&a.common.into()),
        Command::ExportBloch(a) => commands::export_bloch(&a.common.into(), a.povm.as_deref()),
    }
}

impl From<Common> for commands::Context {
    fn from(c: Common) -> Self {
        commands::Context { ensemble: c.ensemble, output: c.output, seed: c.seed, tolerance: c.tolerance }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { commands::EXIT_INVALID } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {}", err.message);
            if let Some(hint) = &err.hint {
                eprintln!("hint: {hint}");
            }
            ExitCode::from(err.code)
        }
    }
}
