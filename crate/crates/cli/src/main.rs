use std::path::PathBuf;
use std::process::ExitCode;

use bigconj_cli::{emit, run, CliError, Options, Scenario, EXIT_INPUT, SUITES};
use clap::{Args, Parser, Subcommand};

/// Numerical verification of Fitzpatrick-function conjugate inequalities
/// and their counterexamples.
#[derive(Parser)]
#[command(name = "bigconj", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one suite with its defaults, or against a scenario's objects.
    Verify {
        /// One of: thm43, ex44, ex52-gap, ex52-implication, ex52-maximality,
        /// thm43-implication, fact41, fact42, fact33, fact51, conjugation,
        /// probe-probcon.
        suite: String,
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Run the suites of a scenario file (`ex44` and `ex52` name the
    /// bundled scenarios).
    Run {
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long, num_args = 1..)]
        suite: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// List the known suites.
    Suites,
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long)]
    grid_n: Option<usize>,
    #[arg(long)]
    box_radius: Option<f64>,
    /// Truncation size or dimension; repeat for a sweep.
    #[arg(long = "n")]
    n: Vec<usize>,
    /// JSON report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    csv_dir: Option<PathBuf>,
}

impl Common {
    fn options(&self) -> Options {
        Options {
            seed: self.seed,
            tol: self.tol,
            grid_n: self.grid_n,
            box_radius: self.box_radius,
            n: self.n.clone(),
        }
    }
}

fn execute(scenario: Option<PathBuf>, filter: Vec<String>, common: Common) -> Result<i32, CliError> {
    if !(common.tol > 0.0 && common.tol.is_finite()) {
        return Err(CliError::Input(format!("--tol must be positive, got {}", common.tol)));
    }
    let scenario = scenario.map(|p| Scenario::load(&p)).transpose()?;
    let report = run(scenario.as_ref(), &filter, &common.options())?;
    emit(&report, common.out.as_deref(), common.csv_dir.as_deref(), &mut std::io::stderr())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT as u8 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Verify { suite, scenario, common } => execute(scenario, vec![suite], common),
        Command::Run { scenario, suite, common } => execute(scenario, suite, common),
        Command::Suites => {
            for s in SUITES {
                println!("{s}");
            }
            Ok(0)
        }
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT as u8)
        }
    }
}
