use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use statemetric_cli::problem::{is_predicate, predicates};
use statemetric_cli::{load, render, run, Command, Format, Options, RunInfo};

/// Metrics on state spaces from Lipschitz seminorms.
#[derive(Parser)]
#[command(name = "statemetric", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Args)]
struct Flags {
    /// Certification tolerance for cutting-plane runs.
    #[arg(long, global = true, default_value_t = 1e-7)]
    tol: f64,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Random samples for recovery and trials for checks.
    #[arg(long, global = true, default_value_t = 2000)]
    samples: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Exit with status 3 when a check finds violations.
    #[arg(long, global = true)]
    strict: bool,
    /// Print numbers in full instead of seven decimals.
    #[arg(long, global = true)]
    precision: bool,
}

#[derive(Subcommand)]
enum Sub {
    /// Seminorm values of the declared observables.
    Eval { file: PathBuf },
    /// Certified distances between declared states.
    Metric { file: PathBuf },
    /// Distances between point masses.
    Table { file: PathBuf },
    /// Transport distances between declared measures.
    Mk { file: PathBuf },
    /// Seminorms recovered from the metric.
    Recover { file: PathBuf },
    /// Effective resistances and resistance distances.
    Resist { file: PathBuf },
    /// Run a property checker.
    Check {
        #[arg(value_parser = parse_predicate)]
        predicate: String,
        file: PathBuf,
    },
}

fn parse_predicate(s: &str) -> Result<String, String> {
    if is_predicate(s) {
        Ok(s.to_string())
    } else {
        Err(format!("expected one of {}", predicates().join(", ")))
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
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    let (command, file) = match cli.command {
        Sub::Eval { file } => (Command::Eval, file),
        Sub::Metric { file } => (Command::Metric, file),
        Sub::Table { file } => (Command::Table, file),
        Sub::Mk { file } => (Command::Mk, file),
        Sub::Recover { file } => (Command::Recover, file),
        Sub::Resist { file } => (Command::Resist, file),
        Sub::Check { predicate, file } => (Command::Check(predicate), file),
    };
    let f = cli.flags;
    let opts = Options {
        tol: f.tol,
        seed: f.seed,
        samples: f.samples,
    };
    let outcome = load(&file).and_then(|p| run(&command, &p, &opts));
    match outcome {
        Ok(out) => {
            let info = RunInfo {
                command: command.name().to_string(),
                tol: opts.tol,
                seed: opts.seed,
                samples: opts.samples,
            };
            let text = render(&out.documents, f.format, f.precision, &info);
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(1);
            }
            if f.strict && out.violations > 0 {
                eprintln!("statemetric: {} violation(s) found", out.violations);
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("statemetric: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
