//! `picardo`: solve declarative integral-equation problems, falsify
//! contraction conditions, and run raw operator iterations.
//!
//! Exit status: 0 converged/pass, 1 usage or parse error, 2 hypothesis
//! violated, 3 diverged or counterexample found. Diagnostics go to standard
//! error; data goes to `report.json` and (with `--trace`) `trace.csv` in the
//! working directory.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use picardo_cli::run::{CliError, Flags, Outcome, RunProducts};
use picardo_cli::{problem, report, run};

#[derive(Parser)]
#[command(
    name = "picardo",
    about = "Fixed-point iteration and integral-equation solver toolkit",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a [fredholm] or [urysohn] problem file
    Solve(RunArgs),
    /// Search for a counterexample to a [contraction-check] condition
    Check(RunArgs),
    /// Run a raw [operator-iteration] recurrence
    Iterate(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Problem file
    file: PathBuf,
    /// Write trace.csv next to report.json
    #[arg(long)]
    trace: bool,
    /// Cross-check against the dense collocation oracle
    #[arg(long)]
    oracle: bool,
    /// Proceed despite hypothesis violations
    #[arg(long)]
    force: bool,
    /// Override the file's seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the iteration cap
    #[arg(long)]
    max_iter: Option<usize>,
    /// Override the step-distance threshold
    #[arg(long)]
    eps_step: Option<f64>,
    /// Override the residual threshold
    #[arg(long)]
    eps_res: Option<f64>,
}

impl RunArgs {
    fn flags(&self) -> Flags {
        Flags {
            trace: self.trace,
            oracle: self.oracle,
            force: self.force,
            seed: self.seed,
            max_iter: self.max_iter,
            eps_step: self.eps_step,
            eps_res: self.eps_res,
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    match std::env::var("PICARDO_THREADS") {
        Err(_) => Ok(()),
        Ok(raw) => {
            let n: usize = raw.parse().map_err(|_| {
                CliError::Usage(format!(
                    "PICARDO_THREADS must be a non-negative integer, got '{raw}'"
                ))
            })?;
            if n > 0 {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
            }
            // 0 = auto: leave the default pool sizing in place
            Ok(())
        }
    }
}

fn execute(command: &Command) -> Result<RunProducts, CliError> {
    let (path, flags, runner): (&Path, Flags, fn(&problem::ProblemFile, &Flags) -> _) =
        match command {
            Command::Solve(args) => (&args.file, args.flags(), run::run_solve),
            Command::Check(args) => (&args.file, args.flags(), run::run_check),
            Command::Iterate(args) => (&args.file, args.flags(), run::run_iterate),
        };
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::Usage(format!("cannot read {}: {e}", path.display()))
    })?;
    let file = problem::parse_problem(&text)?;
    let products = runner(&file, &flags)?;

    report::write_report(Path::new("report.json"), &products.body)?;
    if flags.trace {
        if let Some((trace, k, residual)) = &products.trace {
            report::write_trace_csv(Path::new("trace.csv"), trace, *k, *residual)?;
        }
    }
    Ok(products)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders --help/--version through the error path too
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    match execute(&cli.command) {
        Ok(products) => {
            let code = match products.outcome {
                Outcome::Pass => 0,
                Outcome::HypothesisViolated => 2,
                Outcome::Failed => 3,
            };
            match products.outcome {
                Outcome::Pass => eprintln!("ok: report.json written"),
                Outcome::HypothesisViolated => {
                    eprintln!("hypothesis violated: see report.json")
                }
                Outcome::Failed => {
                    eprintln!("failed (diverged or counterexample): see report.json")
                }
            }
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
